// Payload shapes of the service API. The UI renders these verbatim and
// never recomputes model math client-side.

export interface TopicCard {
  topic_id: number;
  keywords: [string, number][];
  size: number;
  custom_label: string | null;
  derived_label: string | null;
}

export interface HierarchyStep {
  left: number;
  right: number;
  distance: number;
  new_id: number;
}

export interface Hierarchy {
  n_leaves: number;
  steps: HierarchyStep[];
}

export interface MergeResponse {
  committed: boolean;
  n_topics: number;
  topics?: TopicCard[];
}

export interface RepresentativeDoc {
  email_id: string;
  text: string | null;
}

export interface EmailRecord {
  id: string;
  from: string;
  to: string[];
  subject: string;
  body: string;
  received_at: string;
  disposition_kind: string | null;
  disposition_reason: string | null;
  model_topic: number | null;
  derived_label: string | null;
  truncated: boolean;
  processed_at: string | null;
  reviewed: boolean;
}

export interface EmailPage {
  items: EmailRecord[];
  page: number;
  page_size: number;
  total: number;
}

export interface BatchJob {
  id: number;
  requested_at: string;
  size: number;
  counts: Record<string, number>;
  wall_time: number;
  per_email_seconds: number;
}

export interface MonthlyReport {
  month: string;
  derived_counts: Record<string, number>;
  disposition_counts: Record<string, number>;
  label_counts: Record<string, number>;
}
