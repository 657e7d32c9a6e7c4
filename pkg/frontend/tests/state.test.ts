import { describe, expect, it } from "vitest";

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
} from "../src/state.js";
import type { EmailRecord, TopicCard } from "../src/types.js";

function card(id: number, size: number): TopicCard {
  return { topic_id: id, keywords: [], size, custom_label: null, derived_label: null };
}

describe("merge draft", () => {
  it("selection toggles and stays sorted", () => {
    let draft = emptyDraft();
    draft = toggleTopic(draft, 4);
    draft = toggleTopic(draft, 1);
    expect(draft.selected).toEqual([1, 4]);
    draft = toggleTopic(draft, 4);
    expect(draft.selected).toEqual([1]);
  });

  it("any selection change invalidates the preview", () => {
    let draft = toggleTopic(toggleTopic(emptyDraft(), 0), 1);
    draft = withPreview(draft, [card(0, 10)], 2, 3);
    expect(draft.preview).not.toBeNull();
    draft = toggleTopic(draft, 2);
    expect(draft.preview).toBeNull();
    expect(draft.previewTopicCount).toBeNull();
    expect(draft.expectedTopics).toBeNull();
    expect(draft.committed).toBe(false);
  });

  it("needs two topics before preview", () => {
    expect(canPreview(emptyDraft())).toBe(false);
    expect(canPreview(toggleTopic(emptyDraft(), 0))).toBe(false);
    expect(canPreview(toggleTopic(toggleTopic(emptyDraft(), 0), 5))).toBe(true);
  });

  it("remembers the topic count the preview was computed against", () => {
    let draft = toggleTopic(toggleTopic(emptyDraft(), 0), 1);
    draft = withPreview(draft, [], 2, 3);
    expect(draft.expectedTopics).toBe(3);
    expect(markCommitted(draft).committed).toBe(true);
  });
});

describe("topic sorting", () => {
  const topics = [card(0, 5), card(1, 50), card(2, 50), card(3, 7)];

  it("by size descending with id tie-break", () => {
    expect(sortTopics(topics, "size").map((t) => t.topic_id)).toEqual([1, 2, 3, 0]);
  });

  it("by id", () => {
    expect(sortTopics(sortTopics(topics, "size"), "topic_id").map((t) => t.topic_id)).toEqual(
      [0, 1, 2, 3],
    );
  });

  it("does not mutate the input", () => {
    const before = topics.map((t) => t.topic_id);
    sortTopics(topics, "size");
    expect(topics.map((t) => t.topic_id)).toEqual(before);
  });
});

describe("optimistic review updates", () => {
  const record = (id: string, reviewed: boolean): EmailRecord => ({
    id,
    from: "a@b.c",
    to: [],
    subject: "s",
    body: "b",
    received_at: "2025-03-01T08:00:00+00:00",
    disposition_kind: "Process",
    disposition_reason: "",
    model_topic: 0,
    derived_label: "x",
    truncated: false,
    processed_at: "2025-03-01T09:00:00+00:00",
    reviewed,
  });

  it("flips exactly the targeted record", () => {
    const items = [record("a", false), record("b", false)];
    const updated = applyReviewed(items, "b", true);
    expect(updated.map((r) => r.reviewed)).toEqual([false, true]);
    expect(items.map((r) => r.reviewed)).toEqual([false, false]); // original intact
  });
});

describe("banners", () => {
  it("push and dismiss by id", () => {
    let state = emptyBanners();
    state = pushBanner(state, "first");
    state = pushBanner(state, "second", "info");
    expect(state.banners.map((b) => b.text)).toEqual(["first", "second"]);
    const firstId = state.banners[0]!.id;
    state = dismissBanner(state, firstId);
    expect(state.banners.map((b) => b.text)).toEqual(["second"]);
  });
});
