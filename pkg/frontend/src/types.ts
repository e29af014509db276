// Wire shapes, matching the JSON the difflab server emits verbatim.

export interface CampaignMeta {
  kind: "campaign";
  uid: string;
  name: string;
  created_at: string;
  threads: number;
  test_uids: string[];
  config_uids: string[];
}

export interface FamilyLink {
  base_uid: string;
  variant_index: number;
}

export interface TestMeta {
  kind: "test";
  uid: string;
  created_at: string;
  mode: string;
  generator_version: string;
  source_ref: string;
  family: FamilyLink | null;
  invalidation: { reason: string; at: string } | null;
  // present only when requested with with_source=true
  source?: string;
}

export interface ConfigMeta {
  kind: "config";
  uid: string;
  name: string;
  created_at: string;
  command_template: string;
  env: Record<string, string>;
  timeout_ms: number;
  metadata: Record<string, string>;
}

export interface Tagged {
  kind: string;
  value: string | number | null;
}

export interface ExecutionRecord {
  test_uid: string;
  config_uid: string;
  campaign_id: string;
  started_at: string;
  wall_ms: number;
  exit: Tagged;
  outcome: Tagged;
  command: string;
  stdout: string;
  stderr: string;
  stdout_truncated: boolean;
  stderr_truncated: boolean;
  stdout_payload: string | null;
  stderr_payload: string | null;
}

export interface Verdict {
  test_uid: string;
  majority: string | null;
  inconclusive: boolean;
  per_config: Record<string, string>;
  no_vote_configs: string[];
}

export interface ViewDef {
  name: string;
  columns: string[];
  filters: Record<string, string>;
  uid?: string;
  kind?: string;
  created_at?: string;
}

export interface RerunCommand {
  test: string;
  config: string;
  threads: number;
  command: string;
}

export type RerunResponse = ExecutionRecord;

export interface ApiError {
  status: number;
  code: string;
  message: string;
}
