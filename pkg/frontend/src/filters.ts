import type {
  AnnotatedDocument,
  CommentEntry,
  Semantic,
  SemanticLabel,
} from "./types.js";
import { ALL_LABELS } from "./types.js";

export interface FilterSpec {
  minLikes: number;
  minReplies: number;
  // When all five labels are visible no label predicate applies, so
  // Undetermined comments stay visible; any proper subset hides them.
  visibleLabels: Set<SemanticLabel>;
}

export function defaultFilter(): FilterSpec {
  return { minLikes: 0, minReplies: 0, visibleLabels: new Set(ALL_LABELS) };
}

export function admits(spec: FilterSpec, comment: CommentEntry): boolean {
  if (comment.likes < spec.minLikes) return false;
  if (comment.replies < spec.minReplies) return false;
  if (spec.visibleLabels.size === ALL_LABELS.length) return true;
  return (
    comment.semantic !== "Undetermined" &&
    spec.visibleLabels.has(comment.semantic)
  );
}

/** Groups arrive sorted by likes desc (ties by id); filtering preserves that. */
export function visibleGroup(
  group: CommentEntry[],
  spec: FilterSpec,
): CommentEntry[] {
  return group.filter((c) => admits(spec, c));
}

/**
 * Per-sentence pie counts over the visible comments. Undetermined gets a
 * gray segment so the pie total always equals the badge count.
 */
export function pieCounts(group: CommentEntry[]): Map<Semantic, number> {
  const counts = new Map<Semantic, number>();
  for (const c of group) {
    counts.set(c.semantic, (counts.get(c.semantic) ?? 0) + 1);
  }
  return counts;
}

/** Slider maxima track the sentence-level comments in the document. */
export function sliderMaxima(doc: AnnotatedDocument): {
  likes: number;
  replies: number;
} {
  let likes = 0;
  let replies = 0;
  for (const group of Object.values(doc.sentence_groups)) {
    for (const c of group) {
      if (c.likes > likes) likes = c.likes;
      if (c.replies > replies) replies = c.replies;
    }
  }
  return { likes, replies };
}
