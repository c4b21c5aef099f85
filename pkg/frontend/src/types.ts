// Payload shapes of the assessment service API.

export interface FactorAssignment {
  factor: string;
  category: string;
  provenance: string;
  rationale: string;
}

export interface SourceAssessment {
  source: string;
  assignments: FactorAssignment[];
}

export interface AssessmentDocument {
  id: string;
  title: string;
  rubric_version: string;
  profile: EnvironmentProfile;
  source_assessments: SourceAssessment[];
  audit_log: unknown[];
}

export interface EnvironmentProfile {
  os_family: string;
  user_privilege: string;
  installed_software: unknown[];
  execution_facets: unknown[];
  volume_encryption: string;
  setting_flags: Record<string, boolean>;
  protection_overrides?: Record<string, string>;
}

export interface CategoryOption {
  id: string;
  display_text: string;
  rank: number;
  severity: number;
  provenance: string;
}

export interface Factor {
  id: string;
  display_name: string;
  categories: CategoryOption[];
}

export interface Rubric {
  version: string;
  factors: Factor[];
}

export interface KbSource {
  id: string;
  display_name: string;
  source_class: string;
  facet: string;
}

export interface WhatIfEntry {
  source: string;
  factor: string;
  old_category: string;
  new_category: string;
  old_severity: number;
  new_severity: number;
  manual_review: boolean;
  note: string;
}

export interface WhatIfDiff {
  document_id: string;
  entries: WhatIfEntry[];
}

export interface RankEntry {
  rank: number;
  source: string;
  profile: number[];
}

export interface AssignmentResponse {
  source: string;
  factor: string;
  category: string;
  severity: number;
  document: AssessmentDocument;
}

export interface NamedProfile {
  name: string;
  profile: EnvironmentProfile;
}
