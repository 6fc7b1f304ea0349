/** Thin typed client over the serve-mode endpoints. */

import type {
	ControlResponse,
	LabelSubmission,
	PointsPayload,
	QueriesPayload,
	SessionInfo,
} from "./types.js";

/** Error carrying the HTTP status and the server's message body. */
export class ApiError extends Error {
	readonly status: number;
	readonly field: string | null;

	constructor(status: number, message: string, field: string | null = null) {
		super(message);
		this.status = status;
		this.field = field;
	}

	/** 409s mean the submission conflicted with session state (stale batch, paused). */
	get isConflict(): boolean {
		return this.status === 409;
	}
}

async function parseError(resp: Response): Promise<never> {
	let message = `${resp.status} ${resp.statusText}`;
	let field: string | null = null;
	try {
		const body = (await resp.json()) as { error?: string; field?: string };
		if (body.error) message = body.error;
		field = body.field ?? null;
	} catch {
		// non-JSON error body: keep the status line
	}
	throw new ApiError(resp.status, message, field);
}

export class SessionApi {
	readonly base: string;

	constructor(baseUrl: string) {
		this.base = baseUrl.replace(/\/$/, "");
	}

	private async getJson<T>(path: string): Promise<T> {
		const resp = await fetch(`${this.base}${path}`);
		if (!resp.ok) await parseError(resp);
		return (await resp.json()) as T;
	}

	private async postJson<T>(path: string, body: unknown): Promise<T> {
		const resp = await fetch(`${this.base}${path}`, {
			method: "POST",
			headers: { "Content-Type": "application/json" },
			body: JSON.stringify(body),
		});
		if (!resp.ok) await parseError(resp);
		return (await resp.json()) as T;
	}

	session(): Promise<SessionInfo> {
		return this.getJson<SessionInfo>("/session");
	}

	queries(): Promise<QueriesPayload> {
		return this.getJson<QueriesPayload>("/queries");
	}

	points(): Promise<PointsPayload> {
		return this.getJson<PointsPayload>("/points");
	}

	submitLabels(labels: LabelSubmission[]): Promise<SessionInfo> {
		return this.postJson<SessionInfo>("/labels", { labels });
	}

	control(action: "pause" | "resume" | "checkpoint"): Promise<ControlResponse> {
		return this.postJson<ControlResponse>("/control", { action });
	}
}
