"""Model backends for the provider server.

A backend supplies the four capabilities behind the wire protocol. The
deterministic "stub" backend has no ML dependencies and exists so the wire
contract can be exercised anywhere; the "transformers" / "whisper" backends
load real models and are selected purely through configuration.
"""

import hashlib
import math
from dataclasses import dataclass, field


class BackendError(Exception):
    """Startup-time backend failure (missing dependency, model load error)."""


@dataclass
class BackendConfig:
    name: str = "stub"
    text_model: str = "stub-text"
    image_model: str = "stub-image"
    transcribe_model: str = "stub-whisper"
    chat_model: str = "stub-chat"
    device: str = "cpu"
    dim: int = 64
    grid_h: int = 14
    grid_w: int = 14
    # which hidden layer of the vision encoder supplies token embeddings;
    # -1 = final layer
    image_layer: int = -1
    extra: dict = field(default_factory=dict)


class StubBackend:
    """Deterministic hash-seeded vectors; canned transcription and replies.

    Not a model: it exists to validate the wire contract (schemas, shapes,
    grid invariants) without any ML runtime installed.
    """

    def __init__(self, config: BackendConfig):
        self.config = config
        self.dim = config.dim
        self.grid_h = config.grid_h
        self.grid_w = config.grid_w

    @staticmethod
    def _vector(tag: bytes, dim: int) -> list[float]:
        state = int.from_bytes(hashlib.sha256(tag).digest()[:8], "big") or 1
        values = []
        for _ in range(dim):
            state ^= (state << 13) & 0xFFFFFFFFFFFFFFFF
            state ^= state >> 7
            state ^= (state << 17) & 0xFFFFFFFFFFFFFFFF
            values.append(2.0 * (state / 2.0**64) - 1.0)
        norm = math.sqrt(sum(v * v for v in values))
        return [v / norm for v in values]

    def embed_text(self, texts: list[str]) -> list[list[float]]:
        return [self._vector(b"sidecar-text:" + t.encode("utf-8"), self.dim) for t in texts]

    def embed_image(self, image_bytes: bytes) -> tuple[int, int, list[list[float]]]:
        tokens = [
            self._vector(b"sidecar-image:" + image_bytes + b":%d" % i, self.dim)
            for i in range(self.grid_h * self.grid_w)
        ]
        return self.grid_h, self.grid_w, tokens

    def transcribe(self, media_bytes: bytes) -> str:
        digest = hashlib.sha256(media_bytes).hexdigest()[:12]
        return f"stub transcript {digest}"

    def complete(self, messages: list[dict], temperature: float, max_tokens: int) -> str:
        return f"Final Answer: stub reply to {len(messages)} message(s)"


class TransformersBackend:
    """Real text/image embeddings via Hugging Face transformers, speech via
    openai-whisper, chat via a causal LM. Loaded lazily; any missing
    dependency or failed model load raises BackendError at startup."""

    def __init__(self, config: BackendConfig):
        self.config = config
        try:
            import torch
            from transformers import (
                AutoModel,
                AutoModelForCausalLM,
                AutoProcessor,
                AutoTokenizer,
            )
        except ImportError as exc:
            raise BackendError(
                "the transformers backend requires torch and transformers "
                f"(pip install 'cbmrag-sidecar[models]'): {exc}"
            ) from exc
        self._torch = torch
        if config.device.startswith("cuda") and not torch.cuda.is_available():
            raise BackendError(f"device {config.device!r} requested but CUDA is unavailable")
        try:
            self._text_tokenizer = AutoTokenizer.from_pretrained(config.text_model)
            self._text_model = AutoModel.from_pretrained(config.text_model).to(config.device).eval()
            self._image_processor = AutoProcessor.from_pretrained(config.image_model)
            self._image_model = AutoModel.from_pretrained(config.image_model).to(config.device).eval()
            self._chat_tokenizer = AutoTokenizer.from_pretrained(config.chat_model)
            self._chat_model = (
                AutoModelForCausalLM.from_pretrained(config.chat_model).to(config.device).eval()
            )
        except Exception as exc:
            raise BackendError(f"model load failed: {exc}") from exc
        try:
            import whisper

            self._whisper = whisper.load_model(config.transcribe_model, device=config.device)
        except ImportError as exc:
            raise BackendError(f"the transformers backend requires openai-whisper: {exc}") from exc
        except Exception as exc:
            raise BackendError(f"whisper load failed: {exc}") from exc
        self.dim = int(self._text_model.config.hidden_size)

    def embed_text(self, texts: list[str]) -> list[list[float]]:
        torch = self._torch
        with torch.no_grad():
            batch = self._text_tokenizer(
                texts, padding=True, truncation=True, return_tensors="pt"
            ).to(self.config.device)
            hidden = self._text_model(**batch).last_hidden_state
            mask = batch["attention_mask"].unsqueeze(-1)
            pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1)
        return [row.tolist() for row in pooled.cpu()]

    def embed_image(self, image_bytes: bytes) -> tuple[int, int, list[list[float]]]:
        import io

        from PIL import Image

        torch = self._torch
        image = Image.open(io.BytesIO(image_bytes)).convert("RGB")
        with torch.no_grad():
            batch = self._image_processor(images=image, return_tensors="pt").to(self.config.device)
            output = self._image_model(**batch, output_hidden_states=True)
            hidden = output.hidden_states[self.config.image_layer][0]
        # drop a leading class token when present so tokens form a square grid
        count = hidden.shape[0]
        side = int(math.isqrt(count))
        if side * side != count and math.isqrt(count - 1) ** 2 == count - 1:
            hidden = hidden[1:]
            side = math.isqrt(count - 1)
        if side * side != hidden.shape[0]:
            raise BackendError(f"vision encoder produced {count} tokens, not a square grid")
        return side, side, [row.tolist() for row in hidden.cpu()]

    def transcribe(self, media_bytes: bytes) -> str:
        import tempfile

        with tempfile.NamedTemporaryFile(suffix=".media") as handle:
            handle.write(media_bytes)
            handle.flush()
            result = self._whisper.transcribe(handle.name)
        return result["text"].strip()

    def complete(self, messages: list[dict], temperature: float, max_tokens: int) -> str:
        torch = self._torch
        prompt = self._chat_tokenizer.apply_chat_template(
            messages, tokenize=False, add_generation_prompt=True
        )
        with torch.no_grad():
            inputs = self._chat_tokenizer(prompt, return_tensors="pt").to(self.config.device)
            generated = self._chat_model.generate(
                **inputs,
                max_new_tokens=max_tokens,
                do_sample=temperature > 0,
                temperature=max(temperature, 1e-5),
            )
        return self._chat_tokenizer.decode(
            generated[0][inputs["input_ids"].shape[1]:], skip_special_tokens=True
        )


BACKENDS = {
    "stub": StubBackend,
    "transformers": TransformersBackend,
}


def load_backend(config: BackendConfig):
    try:
        factory = BACKENDS[config.name]
    except KeyError:
        raise BackendError(
            f"unknown backend {config.name!r}; available: {sorted(BACKENDS)}"
        ) from None
    return factory(config)
