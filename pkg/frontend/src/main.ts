// App shell: tab routing, data fetching, and handler wiring. The server is
// the source of truth; after every mutation the affected views re-fetch.

import { ApiClient, ApiError } from "./api.js";
import {
  applyReviewed,
  canPreview,
  dismissBanner,
  emptyBanners,
  emptyDraft,
  markCommitted,
  pushBanner,
  sortTopics,
  toggleTopic,
  withPreview,
  type BannerState,
  type MergeDraft,
  type TopicSortKey,
} from "./state.js";
import {
  renderBatchStatus,
  renderHierarchy,
  renderMergeWorkbench,
  renderRepresentativeDocs,
  renderTopicExplorer,
  renderTriage,
  type TriageFilters,
} from "./render.js";
import type { EmailPage, TopicCard } from "./types.js";

const POLL_MS = 5000;
const VIEWS = ["explorer", "hierarchy", "merge", "triage"] as const;
type ViewName = (typeof VIEWS)[number];

class App {
  private api = new ApiClient("");
  private view: ViewName = "explorer";
  private topics: TopicCard[] = [];
  private sortKey: TopicSortKey = "size";
  private draft: MergeDraft = emptyDraft();
  private banners: BannerState = emptyBanners();
  private filters: TriageFilters = { page: 1 };
  private emails: EmailPage = { items: [], page: 1, page_size: 50, total: 0 };
  private docsPanel: HTMLElement | null = null;

  constructor(private root: HTMLElement) {}

  async start(): Promise<void> {
    await this.refreshTopics();
    await this.render();
    window.setInterval(() => void this.pollBatches(), POLL_MS);
  }

  private async guard<T>(work: () => Promise<T>): Promise<T | null> {
    try {
      return await work();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.banners = pushBanner(
          this.banners,
          "Another curator changed the model (409). Reload to continue.",
        );
      } else {
        this.banners = pushBanner(this.banners, String(err));
      }
      await this.render();
      return null;
    }
  }

  private async refreshTopics(): Promise<void> {
    const topics = await this.guard(() => this.api.getTopics());
    if (topics !== null) this.topics = topics;
  }

  private async refreshEmails(): Promise<void> {
    const page = await this.guard(() =>
      this.api.getEmails({ ...this.filters, pageSize: this.emails.page_size }),
    );
    if (page !== null) this.emails = page;
  }

  private async pollBatches(): Promise<void> {
    const slot = document.getElementById("batch-status");
    if (!slot) return;
    try {
      const jobs = await this.api.getBatches();
      slot.replaceChildren(renderBatchStatus(jobs));
    } catch {
      // polling failures are silent; the next tick retries
    }
  }

  // ---------------------------------------------------------------- views

  private async render(): Promise<void> {
    const content = document.getElementById("content")!;
    content.replaceChildren(await this.renderView());
    this.renderChrome();
  }

  private renderChrome(): void {
    const nav = document.getElementById("nav")!;
    nav.replaceChildren(
      ...VIEWS.map((name) => {
        const b = document.createElement("button");
        b.textContent = {
          explorer: "Topic Explorer",
          hierarchy: "Hierarchy",
          merge: "Merge Workbench",
          triage: "Triage",
        }[name];
        b.className = name === this.view ? "tab active" : "tab";
        b.addEventListener("click", () => void this.switchTo(name));
        return b;
      }),
    );
    const bannerBox = document.getElementById("banners")!;
    bannerBox.replaceChildren(
      ...this.banners.banners.map((banner) => {
        const div = document.createElement("div");
        div.className = `banner ${banner.kind}`;
        div.textContent = banner.text;
        const close = document.createElement("button");
        close.textContent = "×";
        close.addEventListener("click", () => {
          this.banners = dismissBanner(this.banners, banner.id);
          this.renderChrome();
        });
        div.appendChild(close);
        return div;
      }),
    );
  }

  private async switchTo(view: ViewName): Promise<void> {
    this.view = view;
    this.docsPanel = null;
    if (view === "triage") await this.refreshEmails();
    if (view === "hierarchy" || view === "merge" || view === "explorer") {
      await this.refreshTopics();
    }
    await this.render();
  }

  private async renderView(): Promise<HTMLElement> {
    switch (this.view) {
      case "explorer": {
        const section = renderTopicExplorer(sortTopics(this.topics, this.sortKey), {
          onSort: (key) => {
            this.sortKey = key;
            void this.render();
          },
          onShowDocs: (topicId) => void this.showDocs(topicId),
          onRename: (topicId, label) => void this.rename(topicId, label),
        });
        if (this.docsPanel) section.appendChild(this.docsPanel);
        return section;
      }
      case "hierarchy": {
        const tree = await this.guard(() => this.api.getHierarchy());
        if (tree === null) return document.createElement("section");
        return renderHierarchy(tree, this.topics);
      }
      case "merge":
        return renderMergeWorkbench(this.topics, this.draft, {
          onToggle: (topicId) => {
            this.draft = toggleTopic(this.draft, topicId);
            void this.render();
          },
          onPreview: () => void this.previewMerge(),
          onCommit: () => void this.commitMerge(),
        });
      case "triage":
        return renderTriage(this.emails, this.filters, this.derivedLabels(), {
          onFilterDerived: (label) => void this.setFilters({ derivedLabel: label, page: 1 }),
          onFilterDisposition: (kind) => void this.setFilters({ disposition: kind, page: 1 }),
          onFilterReviewed: (reviewed) => void this.setFilters({ reviewed, page: 1 }),
          onPage: (page) => void this.setFilters({ page }),
          onToggleReviewed: (emailId, reviewed) => void this.toggleReviewed(emailId, reviewed),
        });
    }
  }

  private derivedLabels(): string[] {
    const labels = new Set<string>();
    for (const t of this.topics) {
      if (t.derived_label) labels.add(t.derived_label);
    }
    labels.add("Internal Correspondence");
    labels.add("Spam, a reply, forwarded, or empty");
    return [...labels].sort();
  }

  // ------------------------------------------------------------- actions

  private async showDocs(topicId: number): Promise<void> {
    const docs = await this.guard(() => this.api.getRepresentativeDocs(topicId));
    if (docs !== null) this.docsPanel = renderRepresentativeDocs(topicId, docs);
    await this.render();
  }

  private async rename(topicId: number, label: string): Promise<void> {
    const done = await this.guard(() => this.api.setLabel(topicId, label));
    if (done !== null) {
      await this.refreshTopics();
      await this.render();
    }
  }

  private async previewMerge(): Promise<void> {
    if (!canPreview(this.draft)) return;
    const expected = this.topics.length;
    const resp = await this.guard(() =>
      this.api.mergeTopics([this.draft.selected], true, expected),
    );
    if (resp !== null && resp.topics) {
      this.draft = withPreview(this.draft, resp.topics, resp.n_topics, expected);
      await this.render();
    }
  }

  private async commitMerge(): Promise<void> {
    if (this.draft.preview === null || this.draft.expectedTopics === null) return;
    const resp = await this.guard(() =>
      this.api.mergeTopics([this.draft.selected], false, this.draft.expectedTopics!),
    );
    if (resp !== null) {
      this.draft = markCommitted(this.draft);
      await this.refreshTopics();  // commit refreshes every view's source
      this.draft = emptyDraft();
      this.banners = pushBanner(
        this.banners,
        `Merge committed; model now has ${resp.n_topics} topics.`,
        "info",
      );
      await this.render();
    }
  }

  private async setFilters(patch: Partial<TriageFilters>): Promise<void> {
    this.filters = { ...this.filters, ...patch };
    await this.refreshEmails();
    await this.render();
  }

  private async toggleReviewed(emailId: string, reviewed: boolean): Promise<void> {
    const before = this.emails.items;
    this.emails = { ...this.emails, items: applyReviewed(before, emailId, reviewed) };
    await this.render();
    try {
      await this.api.setReviewed(emailId, reviewed);
    } catch (err) {
      this.emails = { ...this.emails, items: before }; // roll back optimism
      this.banners = pushBanner(this.banners, `Review flag not saved: ${String(err)}`);
      await this.render();
    }
  }
}

const root = document.getElementById("app");
if (root) {
  void new App(root).start();
}
