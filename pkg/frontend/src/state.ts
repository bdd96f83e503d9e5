import type { SemanticLabel } from "./types.js";
import { ALL_LABELS } from "./types.js";
import type { FilterSpec } from "./filters.js";

export type Layout = "SentenceEnd" | "BetweenLine" | "ClickToShow";

export const LAYOUTS: Layout[] = ["SentenceEnd", "BetweenLine", "ClickToShow"];

export interface Toggles {
  inlineComments: boolean;
  pieCharts: boolean;
  keywordHighlights: boolean;
  paragraphComments: boolean;
}

export interface ViewState {
  layout: Layout;
  toggles: Toggles;
  minLikes: number;
  minReplies: number;
  visibleLabels: Set<SemanticLabel>;
  selectedSentence: number | null;
}

export function defaultState(): ViewState {
  return {
    layout: "SentenceEnd",
    toggles: {
      inlineComments: true,
      pieCharts: true,
      keywordHighlights: true,
      paragraphComments: true,
    },
    minLikes: 0,
    minReplies: 0,
    visibleLabels: new Set(ALL_LABELS),
    selectedSentence: null,
  };
}

export function filterOf(state: ViewState): FilterSpec {
  return {
    minLikes: state.minLikes,
    minReplies: state.minReplies,
    visibleLabels: state.visibleLabels,
  };
}

/** Encode the view state as URL query params for shareable links. */
export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  params.set("layout", state.layout);
  const off = (Object.keys(state.toggles) as (keyof Toggles)[])
    .filter((k) => !state.toggles[k])
    .join(",");
  if (off) params.set("off", off);
  if (state.minLikes > 0) params.set("min_likes", String(state.minLikes));
  if (state.minReplies > 0) params.set("min_replies", String(state.minReplies));
  if (state.visibleLabels.size !== ALL_LABELS.length) {
    params.set(
      "labels",
      ALL_LABELS.filter((l) => state.visibleLabels.has(l))
        .map((l) => l.toLowerCase())
        .join(","),
    );
  }
  if (state.selectedSentence !== null) {
    params.set("selected", String(state.selectedSentence));
  }
  return params.toString();
}

export function decodeState(query: string): ViewState {
  const params = new URLSearchParams(query);
  const state = defaultState();
  const layout = params.get("layout");
  if (layout && (LAYOUTS as string[]).includes(layout)) {
    state.layout = layout as Layout;
  }
  for (const name of (params.get("off") ?? "").split(",")) {
    if (name in state.toggles) state.toggles[name as keyof Toggles] = false;
  }
  const likes = Number(params.get("min_likes") ?? "0");
  if (Number.isFinite(likes) && likes > 0) state.minLikes = likes;
  const replies = Number(params.get("min_replies") ?? "0");
  if (Number.isFinite(replies) && replies > 0) state.minReplies = replies;
  const labels = params.get("labels");
  if (labels !== null && labels !== "all") {
    const chosen = new Set<SemanticLabel>();
    for (const raw of labels.split(",")) {
      const match = ALL_LABELS.find((l) => l.toLowerCase() === raw.trim().toLowerCase());
      if (match) chosen.add(match);
    }
    if (chosen.size > 0) state.visibleLabels = chosen;
  }
  const selected = Number(params.get("selected") ?? "");
  if (Number.isInteger(selected) && selected > 0) state.selectedSentence = selected;
  return state;
}
