import type {
  AnnotatedDocument,
  CommentEntry,
  Paragraph,
  Semantic,
  SemanticLabel,
  Sentence,
} from "./types.js";
import { ALL_LABELS } from "./types.js";
import {
  admits,
  pieCounts,
  sliderMaxima,
  visibleGroup,
} from "./filters.js";
import type { Layout, Toggles, ViewState } from "./state.js";
import { LAYOUTS, filterOf } from "./state.js";
import {
  BADGE_COLOR,
  CATEGORY_COLORS,
  HIGHLIGHT_COLOR,
  PARA_BADGE_COLOR,
  UNDERLINE_COLOR,
  colorFor,
} from "./styles.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface App {
  getState(): ViewState;
  setState(delta: Partial<ViewState>): void;
}

export function createApp(
  root: HTMLElement,
  doc: AnnotatedDocument,
  initial: ViewState,
  onChange?: (state: ViewState) => void,
): App {
  let state = initial;
  const app: App = {
    getState: () => state,
    setState(delta) {
      state = { ...state, ...delta };
      render(root, doc, state, app);
      onChange?.(state);
    },
  };
  render(root, doc, state, app);
  return app;
}

export function renderErrorBanner(root: HTMLElement, message: string): void {
  root.textContent = "";
  const banner = el("div", "error-banner");
  banner.textContent = message;
  root.append(banner);
}

function render(
  root: HTMLElement,
  doc: AnnotatedDocument,
  state: ViewState,
  app: App,
): void {
  root.textContent = "";
  root.append(
    renderControls(doc, state, app),
    renderGlobalSidebar(doc, state),
    renderArticlePane(doc, state, app),
    renderSentenceSidebar(doc, state),
  );
}

// ---------------------------------------------------------------- controls

function renderControls(
  doc: AnnotatedDocument,
  state: ViewState,
  app: App,
): HTMLElement {
  const panel = el("header", "controls");
  panel.id = "controls";

  const layouts = el("fieldset", "layout-picker");
  for (const layout of LAYOUTS) {
    const label = el("label");
    const radio = document.createElement("input");
    radio.type = "radio";
    radio.name = "layout";
    radio.value = layout;
    radio.checked = state.layout === layout;
    radio.addEventListener("change", () => app.setState({ layout: layout as Layout }));
    label.append(radio, layout);
    layouts.append(label);
  }
  panel.append(layouts);

  const toggles = el("fieldset", "view-toggles");
  const entries: [keyof Toggles, string][] = [
    ["inlineComments", "Inline comments"],
    ["pieCharts", "Pie charts"],
    ["keywordHighlights", "Keyword highlights"],
    ["paragraphComments", "Paragraph comments"],
  ];
  for (const [key, text] of entries) {
    const label = el("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.dataset.toggle = key;
    box.checked = state.toggles[key];
    box.addEventListener("change", () =>
      app.setState({ toggles: { ...app.getState().toggles, [key]: box.checked } }),
    );
    label.append(box, text);
    toggles.append(label);
  }
  panel.append(toggles);

  const maxima = sliderMaxima(doc);
  panel.append(
    renderSlider("min_likes", "Min likes", state.minLikes, maxima.likes, (v) =>
      app.setState({ minLikes: v }),
    ),
    renderSlider("min_replies", "Min replies", state.minReplies, maxima.replies, (v) =>
      app.setState({ minReplies: v }),
    ),
  );

  const legend = el("div", "legend");
  for (const label of ALL_LABELS) {
    const chip = el("button", "legend-chip");
    chip.dataset.label = label;
    chip.textContent = label;
    chip.style.backgroundColor = CATEGORY_COLORS[label];
    if (!state.visibleLabels.has(label)) chip.classList.add("off");
    chip.addEventListener("click", () => {
      const next = new Set(app.getState().visibleLabels);
      if (next.has(label)) next.delete(label);
      else next.add(label);
      app.setState({ visibleLabels: next });
    });
    legend.append(chip);
  }
  panel.append(legend);
  return panel;
}

function renderSlider(
  name: string,
  text: string,
  value: number,
  max: number,
  commit: (value: number) => void,
): HTMLElement {
  const label = el("label", "slider");
  const input = document.createElement("input");
  input.type = "range";
  input.dataset.slider = name;
  input.min = "0";
  input.max = String(max);
  input.value = String(Math.min(value, max));
  input.addEventListener("input", () => commit(Number(input.value)));
  label.append(text, input);
  return label;
}

// ---------------------------------------------------------------- sidebars

function renderGlobalSidebar(
  doc: AnnotatedDocument,
  state: ViewState,
): HTMLElement {
  const aside = el("aside", "global-sidebar");
  aside.id = "global-sidebar";
  const visible = visibleGroup(doc.global_comments, filterOf(state));
  const header = el("header", "sidebar-header");
  header.dataset.count = String(visible.length);
  header.textContent = `Global comments (${visible.length})`;
  aside.append(header);
  for (const comment of visible) {
    aside.append(renderComment(comment, "global-comment"));
  }
  return aside;
}

function renderSentenceSidebar(
  doc: AnnotatedDocument,
  state: ViewState,
): HTMLElement {
  const aside = el("aside", "sentence-sidebar");
  aside.id = "sentence-sidebar";
  const index = state.selectedSentence;
  if (index === null) return aside;
  const group = visibleGroup(
    doc.sentence_groups[String(index)] ?? [],
    filterOf(state),
  );
  if (group.length === 0) return aside;
  const header = el("header", "sidebar-header");
  header.dataset.count = String(group.length);
  header.textContent = `Sentence ${index} (${group.length})`;
  aside.append(header);
  for (const comment of group) {
    aside.append(renderComment(comment, "sidebar-comment"));
  }
  return aside;
}

function renderComment(comment: CommentEntry, className: string): HTMLElement {
  const node = el("div", className);
  node.classList.add("comment");
  node.dataset.commentId = comment.id;
  node.style.borderLeftColor = colorFor(comment.semantic);
  const label = el("span", "comment-label");
  label.textContent = comment.semantic;
  label.style.color = colorFor(comment.semantic);
  const meta = el("span", "comment-meta");
  meta.textContent = ` ♥${comment.likes} ↩${comment.replies} `;
  const text = el("span", "comment-text");
  text.textContent = comment.text;
  node.append(label, meta, text);
  return node;
}

// ------------------------------------------------------------ article pane

function renderArticlePane(
  doc: AnnotatedDocument,
  state: ViewState,
  app: App,
): HTMLElement {
  const pane = el("main", "article-pane");
  pane.id = "article-pane";
  const title = el("h1", "article-title");
  title.textContent = doc.article.title;
  pane.append(title);
  for (const paragraph of doc.article.paragraphs) {
    pane.append(...renderParagraph(doc, paragraph, state, app));
  }
  return pane;
}

function renderParagraph(
  doc: AnnotatedDocument,
  paragraph: Paragraph,
  state: ViewState,
  app: App,
): HTMLElement[] {
  const spec = filterOf(state);
  const block = el("p", "paragraph");
  block.dataset.paragraph = String(paragraph.index);
  const nodes: HTMLElement[] = [block];

  for (const sentence of paragraph.sentences) {
    const group = visibleGroup(
      doc.sentence_groups[String(sentence.global_index)] ?? [],
      spec,
    );
    block.append(renderSentence(doc, sentence, group, state, app));
    block.append(document.createTextNode(" "));
    if (
      group.length > 0 &&
      state.toggles.inlineComments &&
      state.layout === "BetweenLine"
    ) {
      block.append(renderInlineComment(group[0], "between-line-comment"));
    }
  }

  const paraGroup = visibleGroup(
    doc.paragraph_groups[String(paragraph.index)] ?? [],
    spec,
  );
  if (state.toggles.paragraphComments && paraGroup.length > 0) {
    nodes.push(renderExpander(paragraph.index, paraGroup));
  }
  return nodes;
}

function renderSentence(
  doc: AnnotatedDocument,
  sentence: Sentence,
  group: CommentEntry[],
  state: ViewState,
  app: App,
): HTMLElement {
  const span = el("span", "sentence");
  const index = sentence.global_index;
  span.dataset.sentence = String(index);
  span.append(renderSentenceText(doc, sentence, state));

  if (group.length === 0) return span;

  // Commented sentences get the count badge and dashed underline in every
  // layout; only the inline presentation of the top comment varies.
  span.classList.add("commented");
  span.style.textDecoration = `underline dashed ${UNDERLINE_COLOR}`;
  if (state.selectedSentence === index) {
    span.classList.add("selected");
    span.style.backgroundColor = HIGHLIGHT_COLOR;
  }
  span.addEventListener("click", () => {
    const current = app.getState().selectedSentence;
    app.setState({ selectedSentence: current === index ? null : index });
  });

  const badge = el("sup", "badge");
  badge.dataset.badgeFor = String(index);
  badge.textContent = String(group.length);
  badge.style.color = BADGE_COLOR;
  span.append(badge);

  if (state.toggles.pieCharts) {
    span.append(renderPie(index, group));
  }
  if (state.toggles.inlineComments && state.layout === "SentenceEnd") {
    span.append(renderInlineComment(group[0], "sentence-end-comment"));
  }

  // The full visible comment set lives in the DOM in every layout; the
  // popover is only opened (Click-to-Show) or mirrored in the sidebar.
  const popover = el("div", "sentence-comments");
  popover.dataset.popoverFor = String(index);
  if (!(state.layout === "ClickToShow" && state.selectedSentence === index)) {
    popover.classList.add("collapsed");
  }
  for (const comment of group) {
    popover.append(renderComment(comment, "popover-comment"));
  }
  span.append(popover);
  return span;
}

function renderSentenceText(
  doc: AnnotatedDocument,
  sentence: Sentence,
  state: ViewState,
): HTMLElement {
  const holder = el("span", "sentence-text");
  const tokens = state.toggles.keywordHighlights
    ? doc.keyword_highlights
        .filter((h) => h.sentence_index === sentence.global_index)
        .map((h) => h.token)
    : [];
  if (tokens.length === 0) {
    holder.textContent = sentence.text;
    return holder;
  }
  const pattern = new RegExp(
    `(${tokens.map(escapeRegExp).join("|")})`,
    "giu",
  );
  for (const part of sentence.text.split(pattern)) {
    if (part === "") continue;
    if (tokens.some((t) => t.toLowerCase() === part.toLowerCase())) {
      const circle = el("span", "keyword-circle");
      circle.dataset.keyword = part.toLowerCase();
      circle.style.outline = `2px solid ${HIGHLIGHT_COLOR}`;
      circle.style.borderRadius = "50%";
      circle.textContent = part;
      holder.append(circle);
    } else {
      holder.append(document.createTextNode(part));
    }
  }
  return holder;
}

function escapeRegExp(text: string): string {
  return text.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}

function renderInlineComment(top: CommentEntry, className: string): HTMLElement {
  const tag = className === "between-line-comment" ? "div" : "span";
  const node = el(tag, className);
  node.classList.add("inline-comment");
  node.dataset.commentId = top.id;
  node.style.color = colorFor(top.semantic);
  node.textContent = `[${top.semantic}: ${top.text}]`;
  return node;
}

function renderExpander(index: number, group: CommentEntry[]): HTMLElement {
  const wrapper = el("div", "paragraph-footer");
  const button = el("button", "expander");
  button.dataset.expanderFor = String(index);
  const badge = el("sup", "para-badge");
  badge.textContent = String(group.length);
  badge.style.color = PARA_BADGE_COLOR;
  button.append("comments", badge);
  const panel = el("div", "paragraph-comments");
  panel.dataset.paragraphComments = String(index);
  panel.classList.add("collapsed");
  for (const comment of group) {
    panel.append(renderComment(comment, "paragraph-comment"));
  }
  button.addEventListener("click", () => panel.classList.toggle("collapsed"));
  wrapper.append(button, panel);
  return wrapper;
}

// -------------------------------------------------------------------- pies

function renderPie(index: number, group: CommentEntry[]): SVGSVGElement {
  const counts = pieCounts(group);
  const total = group.length;
  const radius = 4 + 2 * total; // radius grows with the comment count
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.classList.add("pie");
  svg.dataset.pieFor = String(index);
  svg.setAttribute("width", String(2 * radius));
  svg.setAttribute("height", String(2 * radius));
  svg.setAttribute("viewBox", `0 0 ${2 * radius} ${2 * radius}`);

  const ordered: Semantic[] = [...ALL_LABELS, "Undetermined"];
  const present = ordered.filter((label) => counts.has(label));
  if (present.length === 1) {
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(radius));
    circle.setAttribute("cy", String(radius));
    circle.setAttribute("r", String(radius));
    circle.setAttribute("fill", colorFor(present[0]));
    circle.dataset.pieLabel = present[0];
    circle.dataset.count = String(counts.get(present[0]));
    svg.append(circle);
    return svg;
  }

  let angle = -Math.PI / 2;
  for (const label of present) {
    const count = counts.get(label)!;
    const sweep = (2 * Math.PI * count) / total;
    const x0 = radius + radius * Math.cos(angle);
    const y0 = radius + radius * Math.sin(angle);
    angle += sweep;
    const x1 = radius + radius * Math.cos(angle);
    const y1 = radius + radius * Math.sin(angle);
    const large = sweep > Math.PI ? 1 : 0;
    const path = document.createElementNS(SVG_NS, "path");
    path.setAttribute(
      "d",
      `M ${radius} ${radius} L ${x0} ${y0} ` +
        `A ${radius} ${radius} 0 ${large} 1 ${x1} ${y1} Z`,
    );
    path.setAttribute("fill", colorFor(label));
    path.dataset.pieLabel = label;
    path.dataset.count = String(count);
    svg.append(path);
  }
  return svg;
}

// ------------------------------------------------------------------ helpers

function el(tag: string, className?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  return node;
}
