import { readFileSync } from "node:fs";
import { resolve } from "node:path";

import type { App } from "../src/render.js";
import { createApp } from "../src/render.js";
import type { ViewState } from "../src/state.js";
import { defaultState } from "../src/state.js";
import type { AnnotatedDocument } from "../src/types.js";

// vitest runs from the frontend/ package root.
const FIXTURE = resolve(process.cwd(), "../fixtures/pengyu.annotated.json");

export function loadFixture(): AnnotatedDocument {
  return JSON.parse(readFileSync(FIXTURE, "utf-8")) as AnnotatedDocument;
}

export function mount(
  doc: AnnotatedDocument,
  state: ViewState = defaultState(),
): { root: HTMLElement; app: App } {
  const root = document.createElement("div");
  root.id = "app";
  document.body.textContent = "";
  document.body.append(root);
  const app = createApp(root, doc, state);
  return { root, app };
}

/** All comment ids present in the DOM, inline clones included. */
export function visibleCommentIds(root: HTMLElement): Set<string> {
  const ids = new Set<string>();
  for (const node of root.querySelectorAll<HTMLElement>("[data-comment-id]")) {
    ids.add(node.dataset.commentId!);
  }
  return ids;
}

export function commentedSentenceIndices(root: HTMLElement): number[] {
  return [...root.querySelectorAll<HTMLElement>("sup[data-badge-for]")].map(
    (badge) => Number(badge.dataset.badgeFor),
  );
}

export function clickSentence(root: HTMLElement, index: number): void {
  const span = root.querySelector<HTMLElement>(
    `span.sentence[data-sentence="${index}"]`,
  );
  if (!span) throw new Error(`sentence ${index} not rendered`);
  span.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}
