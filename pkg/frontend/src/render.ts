// DOM construction helpers and the four view renderers. Views are plain
// functions from data + handlers to elements; all state lives in main.ts.

import { layoutDendrogram } from "./dendrogram.js";
import type { MergeDraft } from "./state.js";
import type {
  BatchJob,
  EmailPage,
  Hierarchy,
  RepresentativeDoc,
  TopicCard,
} from "./types.js";

type Child = Node | string | null | undefined;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  for (const child of children) {
    if (child === null || child === undefined) continue;
    node.append(typeof child === "string" ? document.createTextNode(child) : child);
  }
  return node;
}

function keywordLine(card: TopicCard, n = 10): string {
  return card.keywords.slice(0, n).map(([term]) => term).join(", ");
}

export interface ExplorerHandlers {
  onSort: (key: "size" | "topic_id") => void;
  onShowDocs: (topicId: number) => void;
  onRename: (topicId: number, label: string) => void;
}

export function renderTopicExplorer(
  topics: TopicCard[],
  handlers: ExplorerHandlers,
): HTMLElement {
  const sortBar = el(
    "div",
    { class: "toolbar" },
    el("span", {}, `${topics.length} topics`),
    button("Sort by size", () => handlers.onSort("size")),
    button("Sort by id", () => handlers.onSort("topic_id")),
  );
  const cards = topics.map((card) => {
    const labelInput = el("input", {
      type: "text",
      value: card.custom_label ?? "",
      placeholder: "custom label",
      class: "label-input",
    }) as HTMLInputElement;
    labelInput.value = card.custom_label ?? "";
    const save = button("Save label", () => {
      if (labelInput.value.trim()) handlers.onRename(card.topic_id, labelInput.value.trim());
    });
    return el(
      "div",
      { class: "card", "data-topic": String(card.topic_id) },
      el(
        "div",
        { class: "card-head" },
        el("strong", {}, `Topic ${card.topic_id}`),
        el("span", { class: "badge" }, `${card.size} emails`),
        card.derived_label ? el("span", { class: "badge derived" }, card.derived_label) : null,
      ),
      el("p", { class: "keywords" }, keywordLine(card)),
      el(
        "div",
        { class: "card-actions" },
        labelInput,
        save,
        button("Representative docs", () => handlers.onShowDocs(card.topic_id)),
      ),
    );
  });
  return el("section", {}, sortBar, el("div", { class: "card-grid" }, ...cards));
}

export function renderRepresentativeDocs(
  topicId: number,
  docs: RepresentativeDoc[],
): HTMLElement {
  return el(
    "div",
    { class: "docs-panel" },
    el("h3", {}, `Representative documents of topic ${topicId}`),
    el(
      "ul",
      {},
      ...docs.map((d) => el("li", {}, el("code", {}, d.email_id), " — ", d.text ?? "(text not on file)")),
    ),
  );
}

export function renderHierarchy(tree: Hierarchy, topics: TopicCard[]): HTMLElement {
  const layout = layoutDendrogram(tree);
  const width = 900;
  const height = 420;
  const pad = 28;
  const plotH = height - 2 * pad - 40;
  const svgNS = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "dendrogram");

  const sx = (x: number) => pad + x * (width - 2 * pad);
  const sy = (y: number) => height - 40 - y * plotH;

  for (const seg of layout.segments) {
    const line = document.createElementNS(svgNS, "line");
    line.setAttribute("x1", String(sx(seg.x1)));
    line.setAttribute("y1", String(sy(seg.y1)));
    line.setAttribute("x2", String(sx(seg.x2)));
    line.setAttribute("y2", String(sy(seg.y2)));
    line.setAttribute("class", "dendro-line");
    svg.appendChild(line);
  }
  const labels = new Map(topics.map((t) => [t.topic_id, t.custom_label ?? `${t.topic_id}`]));
  for (const leaf of layout.leafOrder) {
    const pos = layout.positions.get(leaf)!;
    const text = document.createElementNS(svgNS, "text");
    text.setAttribute("x", String(sx(pos.x)));
    text.setAttribute("y", String(height - 22));
    text.setAttribute("class", "dendro-leaf");
    text.setAttribute("transform", `rotate(35 ${sx(pos.x)} ${height - 22})`);
    text.textContent = labels.get(leaf) ?? String(leaf);
    svg.appendChild(text);
  }
  return el(
    "section",
    {},
    el("p", { class: "hint" },
       `${tree.n_leaves} topics, ${tree.steps.length} merges; height is cosine distance between topic representations`),
    svg as unknown as HTMLElement,
  );
}

export interface WorkbenchHandlers {
  onToggle: (topicId: number) => void;
  onPreview: () => void;
  onCommit: () => void;
}

export function renderMergeWorkbench(
  topics: TopicCard[],
  draft: MergeDraft,
  handlers: WorkbenchHandlers,
): HTMLElement {
  const rows = topics.map((card) => {
    const box = el("input", { type: "checkbox" }) as HTMLInputElement;
    box.checked = draft.selected.includes(card.topic_id);
    box.addEventListener("change", () => handlers.onToggle(card.topic_id));
    return el(
      "label",
      { class: "merge-row" },
      box,
      el("span", {}, `Topic ${card.topic_id} (${card.size})`),
      el("span", { class: "keywords" }, keywordLine(card, 6)),
    );
  });
  const previewBtn = button("Preview merge (what-if)", handlers.onPreview);
  previewBtn.disabled = draft.selected.length < 2;
  const commitBtn = button("Commit merge", handlers.onCommit);
  commitBtn.disabled = draft.preview === null || draft.committed;

  let previewPanel: HTMLElement | null = null;
  if (draft.preview !== null) {
    const merged = draft.preview;
    previewPanel = el(
      "div",
      { class: "preview-panel" },
      el("h3", {}, `Preview: ${draft.previewTopicCount} topics after merge`),
      el(
        "ul",
        {},
        ...merged.map((card) =>
          el("li", {}, el("strong", {}, `Topic ${card.topic_id} (${card.size}): `), keywordLine(card)),
        ),
      ),
      el("p", { class: "hint" }, "Nothing is committed yet; the preview is read-only."),
    );
  }
  return el(
    "section",
    {},
    el("p", { class: "hint" }, "Select at least two topics, preview the merged representation, then commit."),
    el("div", { class: "merge-list" }, ...rows),
    el("div", { class: "toolbar" }, previewBtn, commitBtn,
       draft.committed ? el("span", { class: "badge" }, "committed") : null),
    previewPanel,
  );
}

export interface TriageHandlers {
  onFilterDerived: (label: string | undefined) => void;
  onFilterDisposition: (kind: string | undefined) => void;
  onFilterReviewed: (reviewed: boolean | undefined) => void;
  onPage: (page: number) => void;
  onToggleReviewed: (emailId: string, reviewed: boolean) => void;
}

export interface TriageFilters {
  derivedLabel?: string;
  disposition?: string;
  reviewed?: boolean;
  page: number;
}

const DISPOSITIONS = ["Process", "InternalCorrespondence", "SpamReplyForwardedOrEmpty", "Quarantined"];

export function renderTriage(
  page: EmailPage,
  filters: TriageFilters,
  derivedLabels: string[],
  handlers: TriageHandlers,
): HTMLElement {
  const derivedSelect = select(
    ["(any derived label)", ...derivedLabels],
    filters.derivedLabel,
    (v) => handlers.onFilterDerived(v),
  );
  const dispositionSelect = select(
    ["(any disposition)", ...DISPOSITIONS],
    filters.disposition,
    (v) => handlers.onFilterDisposition(v),
  );
  const reviewedSelect = select(
    ["(any review state)", "reviewed", "unreviewed"],
    filters.reviewed === undefined ? undefined : filters.reviewed ? "reviewed" : "unreviewed",
    (v) => handlers.onFilterReviewed(v === undefined ? undefined : v === "reviewed"),
  );

  const header = el(
    "tr",
    {},
    ...["Received", "From", "Subject", "Disposition", "Derived label", "Reviewed"].map((h) =>
      el("th", {}, h),
    ),
  );
  const rows = page.items.map((r) => {
    const box = el("input", { type: "checkbox" }) as HTMLInputElement;
    box.checked = r.reviewed;
    box.addEventListener("change", () => handlers.onToggleReviewed(r.id, box.checked));
    return el(
      "tr",
      { "data-email": r.id },
      el("td", {}, r.received_at.slice(0, 16).replace("T", " ")),
      el("td", {}, r.from),
      el("td", {}, r.subject || "(no subject)"),
      el("td", {}, r.disposition_kind ?? "(pending)"),
      el("td", {}, r.derived_label ?? ""),
      el("td", {}, box),
    );
  });

  const lastPage = Math.max(1, Math.ceil(page.total / page.page_size));
  const prev = button("Prev", () => handlers.onPage(filters.page - 1));
  prev.disabled = filters.page <= 1;
  const next = button("Next", () => handlers.onPage(filters.page + 1));
  next.disabled = filters.page >= lastPage;

  return el(
    "section",
    {},
    el("div", { class: "toolbar" }, derivedSelect, dispositionSelect, reviewedSelect),
    el("table", { class: "triage" }, el("thead", {}, header), el("tbody", {}, ...rows)),
    el(
      "div",
      { class: "toolbar" },
      prev,
      el("span", {}, `page ${filters.page} of ${lastPage} (${page.total} emails)`),
      next,
    ),
  );
}

export function renderBatchStatus(jobs: BatchJob[]): HTMLElement {
  if (jobs.length === 0) return el("span", { class: "hint" }, "no batches yet");
  const last = jobs[0]!;
  const counts = Object.entries(last.counts)
    .map(([k, v]) => `${k}: ${v}`)
    .join(", ");
  return el(
    "span",
    { class: "hint" },
    `last batch #${last.id}: ${last.size} emails in ${last.wall_time.toFixed(2)}s (${counts})`,
  );
}

function button(label: string, onClick: () => void): HTMLButtonElement {
  const b = el("button", { type: "button" }, label);
  b.addEventListener("click", onClick);
  return b;
}

function select(
  options: string[],
  current: string | undefined,
  onChange: (value: string | undefined) => void,
): HTMLSelectElement {
  const s = el("select", {}) as HTMLSelectElement;
  options.forEach((opt, i) => {
    const o = el("option", { value: i === 0 ? "" : opt }, opt);
    s.appendChild(o);
  });
  s.value = current ?? "";
  s.addEventListener("change", () => onChange(s.value === "" ? undefined : s.value));
  return s;
}
