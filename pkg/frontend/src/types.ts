/** Payload shapes of the serve-mode API (prefix /api/v1), mirrored 1:1. */

export interface SessionInfo {
	version: number;
	iteration: number;
	n_labeled: number;
	n_unlabeled: number;
	accuracy_history: number[];
	budget: number;
	budget_used: number;
	strategy: string;
	classes: number[];
	done: boolean;
	paused: boolean;
	projection: string;
}

export interface QueryPoint {
	index: number;
	features: number[];
	x: number;
	y: number;
}

export interface QueriesPayload {
	queries: QueryPoint[];
	done: boolean;
}

export interface PoolPoint {
	index: number;
	x: number;
	y: number;
	predicted: number | null;
	labeled: boolean;
	label: number | null;
}

export interface PointsPayload {
	points: PoolPoint[];
}

export interface LabelSubmission {
	index: number;
	label: number;
}

export interface ControlResponse {
	ok: boolean;
	paused?: boolean;
	checkpoint?: string;
}
