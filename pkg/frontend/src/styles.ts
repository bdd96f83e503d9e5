// The single place where the category palette is pinned. Legend chips,
// inline comment text, pie segments, and sidebar borders all read from here.

import type { Semantic, SemanticLabel } from "./types.js";

export const CATEGORY_COLORS: Record<SemanticLabel, string> = {
  Statement: "#1f6fd6", // blue
  Question: "#d62828", // red
  Exclamation: "#2a9d4a", // green
  Suggestion: "#7b2cbf", // purple
  Sarcasm: "#f77f00", // orange
};

export const UNDETERMINED_COLOR = "#8d99ae"; // gray

export const BADGE_COLOR = "#f77f00"; // orange count badges on sentences
export const PARA_BADGE_COLOR = "#d62828"; // red count badges on expanders
export const UNDERLINE_COLOR = "#1f6fd6"; // blue dashed underline
export const HIGHLIGHT_COLOR = "#ffd60a"; // yellow keyword circles / selection

export function colorFor(semantic: Semantic): string {
  return semantic === "Undetermined"
    ? UNDETERMINED_COLOR
    : CATEGORY_COLORS[semantic];
}
