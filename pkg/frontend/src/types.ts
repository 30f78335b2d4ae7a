// Wire types for the annotation service; field names match the server verbatim.

export interface SessionQuery {
  segment_id: number;
  grid: string[];
  features: Record<string, number>;
  queries_made: number;
  budget: number;
  holdout_accuracy: number;
}

export interface LabelResult {
  queries_made: number;
  budget: number;
  holdout_accuracy: number;
  labeled: number;
}

export interface FinishResult {
  model_path: string;
  labeled_path: string;
  curve_path: string;
}

export type Decision = "accept" | "reject";

export interface UISessionState {
  sessionId: string;
  query: SessionQuery | null;
  queriesMade: number;
  budget: number;
  accuracyHistory: number[];
}
