// Wire types for the session service. The UI never computes scores,
// contributions, or predictions itself; every displayed number comes from
// these response shapes.

export interface ConceptRow {
  id: string;
  name: string;
  score: number;
  contribution: number;
  overridden: boolean;
  heatmap_url: string;
}

export interface PredictionPayload {
  predicted_label: string;
  probabilities: Record<string, number>;
  logits: Record<string, number>;
}

export interface AnalysisResponse {
  session_id: string;
  prediction: PredictionPayload;
  concepts: ConceptRow[];
}

export interface ReActStep {
  thought: string;
  action: string | null;
  action_input: string | null;
  observation: string | null;
}

export interface AgentTrace {
  agent_name: string;
  steps: ReActStep[];
  final_answer: string;
  terminated_by: string;
}

export interface ReportResponse {
  findings: string;
  diagnosis: string;
  guidelines: string;
  traces: AgentTrace[];
  created_at: string;
}

export interface SessionResponse {
  id: string;
  created_at: string;
  updated_at: string;
  has_image: boolean;
  prediction: PredictionPayload | null;
  concepts: ConceptRow[] | null;
  report: ReportResponse | null;
  chat_history: { role: string; content: string }[];
}

export interface ChatResponse {
  session_id: string;
  reply: string;
  history_length: number;
}

export interface UploadResponse {
  session_id: string;
  doc_id: string;
  chunks_added: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}

// media types the service accepts on /uploads; mirrored for client-side rejection
export const UPLOAD_MEDIA_TYPES = ["text/plain", "text/markdown", "audio/mpeg", "video/mp4"];
