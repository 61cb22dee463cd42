"""Role prompts, loaded from plain-text files so they are editable without rebuilds.

A custom prompts directory may override any subset of files; missing ones fall
back to the packaged defaults.
"""

from pathlib import Path

PROMPT_NAMES = (
    "pneumonia_agent",
    "covid19_agent",
    "normal_agent",
    "radiologist",
    "report_writer",
    "chat_agent",
    "concept_generation",
)

_PACKAGED_DIR = Path(__file__).resolve().parent.parent / "data" / "prompts"


class PromptLibrary:
    def __init__(self, prompts_dir: Path | str | None = None):
        self.prompts_dir = Path(prompts_dir) if prompts_dir else None
        self._cache: dict[str, str] = {}

    def get(self, name: str) -> str:
        if name not in PROMPT_NAMES:
            raise KeyError(f"unknown prompt {name!r}; expected one of {PROMPT_NAMES}")
        if name not in self._cache:
            self._cache[name] = self._load(name)
        return self._cache[name]

    def _load(self, name: str) -> str:
        if self.prompts_dir is not None:
            custom = self.prompts_dir / f"{name}.txt"
            if custom.exists():
                return custom.read_text(encoding="utf-8").strip()
        packaged = _PACKAGED_DIR / f"{name}.txt"
        return packaged.read_text(encoding="utf-8").strip()

    def disease_agent_prompt(self, label: str) -> str:
        return self.get(
            {"Pneumonia": "pneumonia_agent", "COVID-19": "covid19_agent", "Normal": "normal_agent"}[label]
        )
