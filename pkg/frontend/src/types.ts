export type SemanticLabel =
  | "Statement"
  | "Question"
  | "Exclamation"
  | "Suggestion"
  | "Sarcasm";

export const ALL_LABELS: SemanticLabel[] = [
  "Statement",
  "Question",
  "Exclamation",
  "Suggestion",
  "Sarcasm",
];

export type Semantic = SemanticLabel | "Undetermined";

export type LocationLevel = "SentenceLevel" | "ParagraphLevel" | "GlobalLevel";

export type CommentLocation =
  | "Undetermined"
  | { level: LocationLevel; indices: number[] };

export interface CommentEntry {
  id: string;
  text: string;
  likes: number;
  replies: number;
  semantic: Semantic;
  location: CommentLocation;
  gamma_semantic: number;
  gamma_location: number;
  provenance_semantic: string;
  provenance_location: string;
}

export interface Sentence {
  global_index: number;
  text: string;
}

export interface Paragraph {
  index: number;
  sentences: Sentence[];
}

export interface Article {
  id: string;
  title: string;
  paragraphs: Paragraph[];
}

export interface KeywordHighlight {
  sentence_index: number;
  token: string;
}

export interface AnnotatedDocument {
  article: Article;
  sentence_groups: Record<string, CommentEntry[]>;
  paragraph_groups: Record<string, CommentEntry[]>;
  global_comments: CommentEntry[];
  top_comment: Record<string, string>;
  pie_data: Record<string, Record<string, number>>;
  keyword_highlights: KeywordHighlight[];
  undetermined: string[];
}
