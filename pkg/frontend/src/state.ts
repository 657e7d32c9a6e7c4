// Pure view-state logic, kept out of the DOM so it can be unit tested.

import type { EmailRecord, TopicCard } from "./types.js";

export interface MergeDraft {
  selected: number[];
  /** Preview from the what-if endpoint; null once the selection changes. */
  preview: TopicCard[] | null;
  previewTopicCount: number | null;
  /** Topic count the preview was computed against, for conflict detection. */
  expectedTopics: number | null;
  committed: boolean;
}

export function emptyDraft(): MergeDraft {
  return {
    selected: [],
    preview: null,
    previewTopicCount: null,
    expectedTopics: null,
    committed: false,
  };
}

/** Any selection change invalidates a pending preview. */
export function toggleTopic(draft: MergeDraft, topicId: number): MergeDraft {
  const selected = draft.selected.includes(topicId)
    ? draft.selected.filter((t) => t !== topicId)
    : [...draft.selected, topicId].sort((a, b) => a - b);
  return { ...emptyDraft(), selected };
}

export function withPreview(
  draft: MergeDraft,
  preview: TopicCard[],
  previewTopicCount: number,
  expectedTopics: number,
): MergeDraft {
  return { ...draft, preview, previewTopicCount, expectedTopics, committed: false };
}

export function markCommitted(draft: MergeDraft): MergeDraft {
  return { ...draft, committed: true };
}

export function canPreview(draft: MergeDraft): boolean {
  return draft.selected.length >= 2;
}

export type TopicSortKey = "size" | "topic_id";

export function sortTopics(topics: TopicCard[], key: TopicSortKey): TopicCard[] {
  const out = [...topics];
  if (key === "size") {
    out.sort((a, b) => b.size - a.size || a.topic_id - b.topic_id);
  } else {
    out.sort((a, b) => a.topic_id - b.topic_id);
  }
  return out;
}

// --- optimistic review updates -------------------------------------------

export function applyReviewed(
  items: EmailRecord[],
  emailId: string,
  reviewed: boolean,
): EmailRecord[] {
  return items.map((r) => (r.id === emailId ? { ...r, reviewed } : r));
}

// --- non-blocking error banners -------------------------------------------

export interface Banner {
  id: number;
  text: string;
  kind: "error" | "info";
}

export interface BannerState {
  next: number;
  banners: Banner[];
}

export function emptyBanners(): BannerState {
  return { next: 1, banners: [] };
}

export function pushBanner(
  state: BannerState,
  text: string,
  kind: Banner["kind"] = "error",
): BannerState {
  return {
    next: state.next + 1,
    banners: [...state.banners, { id: state.next, text, kind }],
  };
}

export function dismissBanner(state: BannerState, id: number): BannerState {
  return { ...state, banners: state.banners.filter((b) => b.id !== id) };
}
