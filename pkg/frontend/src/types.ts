export interface SourceCard {
  doc_id: string;
  title: string;
  subjects: string[];
  date: string;
  languages: string[];
  domain?: string;
}

export interface ChatResponse {
  session_id: string;
  answer: string;
  sources: SourceCard[];
  timings: { retrieve_ms: number; generate_ms: number };
}

export interface EvalRecord {
  question_id: number;
  config_id: { retriever: string; generator: string };
  doc_ratings: Record<string, Record<string, number>>;
  answer_ratings: Record<string, number>;
  rater_id: string;
}

export const DOC_DIMENSIONS = [
  "relevance",
  "accuracy",
  "usefulness",
  "temporality",
  "actionability",
] as const;

export const ANSWER_DIMENSIONS = [
  "congruence",
  "coherence",
  "relevance",
  "creativity",
  "engagement",
] as const;

export interface AppConfig {
  baseUrl?: string;
  retrieverTag?: string;
  generatorTag?: string;
}
