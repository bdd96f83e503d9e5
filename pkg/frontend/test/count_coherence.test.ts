import { beforeEach, describe, expect, it } from "vitest";

import {
  clickSentence,
  commentedSentenceIndices,
  loadFixture,
  mount,
} from "./helpers.js";

const doc = loadFixture();

function pieTotal(root: HTMLElement, index: number): number {
  const pie = root.querySelector(`svg[data-pie-for="${index}"]`);
  expect(pie, `pie for sentence ${index}`).not.toBeNull();
  let total = 0;
  for (const segment of pie!.querySelectorAll<SVGElement>("[data-pie-label]")) {
    total += Number(segment.dataset.count);
  }
  return total;
}

function badgeCount(root: HTMLElement, index: number): number {
  const badge = root.querySelector(`sup[data-badge-for="${index}"]`);
  expect(badge, `badge for sentence ${index}`).not.toBeNull();
  return Number(badge!.textContent);
}

function sidebarCount(root: HTMLElement): number {
  const header = root.querySelector<HTMLElement>(
    "#sentence-sidebar .sidebar-header",
  );
  expect(header, "sentence sidebar header").not.toBeNull();
  return Number(header!.dataset.count);
}

function assertCoherence(root: HTMLElement): void {
  const indices = commentedSentenceIndices(root);
  expect(indices.length).toBeGreaterThan(0);
  for (const index of indices) {
    const badge = badgeCount(root, index);
    expect(pieTotal(root, index), `pie total for sentence ${index}`).toBe(badge);
    clickSentence(root, index);
    expect(sidebarCount(root), `sidebar count for sentence ${index}`).toBe(badge);
  }
}

describe("count coherence: badge = sidebar header = pie total", () => {
  beforeEach(() => {
    document.body.textContent = "";
  });

  it("holds with no filters applied", () => {
    const { root } = mount(doc);
    assertCoherence(root);
  });

  it("holds under a likes threshold plus a label subset", () => {
    const { root } = mount(doc);

    const slider = root.querySelector<HTMLInputElement>(
      'input[data-slider="min_likes"]',
    )!;
    slider.value = "10";
    slider.dispatchEvent(new Event("input", { bubbles: true }));

    for (const label of ["Suggestion", "Sarcasm"]) {
      root
        .querySelector<HTMLElement>(`button.legend-chip[data-label="${label}"]`)!
        .dispatchEvent(new MouseEvent("click", { bubbles: true }));
    }

    assertCoherence(root);

    // The filter actually bit: fewer commented sentences than unfiltered.
    const unfiltered = mount(doc);
    expect(commentedSentenceIndices(root).length).toBeLessThan(
      commentedSentenceIndices(unfiltered.root).length,
    );
  });
});
