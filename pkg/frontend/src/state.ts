/** Client-side session state: the last successful server fetch plus the
 * user's pending label selections.  Nothing else is stored, so any render
 * is a pure function of this object. */

import { ApiError, SessionApi } from "./api.js";
import type { PoolPoint, QueryPoint, SessionInfo } from "./types.js";

export interface Snapshot {
	session: SessionInfo;
	points: PoolPoint[];
	queries: QueryPoint[];
}

export type Listener = (view: SessionView) => void;

export class SessionView {
	private readonly api: SessionApi;
	private readonly listeners: Listener[] = [];

	snapshot: Snapshot | null = null;
	/** Pending selections, keyed by query index; only current-batch keys. */
	pending = new Map<number, number>();
	/** Query index that keyboard shortcuts apply to. */
	focused: number | null = null;
	/** Message for the error banner; null when healthy. */
	error: string | null = null;
	/** True while a submission is in flight (at most one). */
	submitting = false;

	constructor(api: SessionApi) {
		this.api = api;
	}

	onChange(listener: Listener): void {
		this.listeners.push(listener);
	}

	private notify(): void {
		for (const listener of this.listeners) listener(this);
	}

	/** Fetch all three payloads; commit atomically or keep the old state. */
	async refresh(): Promise<void> {
		try {
			const [session, points, queries] = await Promise.all([
				this.api.session(),
				this.api.points(),
				this.api.queries(),
			]);
			this.snapshot = { session, points: points.points, queries: queries.queries };
			this.error = null;
			this.prunePending();
			if (this.focused === null || !this.isQueried(this.focused)) {
				this.focused = this.snapshot.queries[0]?.index ?? null;
			}
		} catch (err) {
			this.error = err instanceof Error ? err.message : String(err);
		}
		this.notify();
	}

	private prunePending(): void {
		const batch = new Set(this.snapshot?.queries.map((q) => q.index) ?? []);
		for (const index of [...this.pending.keys()]) {
			if (!batch.has(index)) this.pending.delete(index);
		}
	}

	isQueried(index: number): boolean {
		return this.snapshot?.queries.some((q) => q.index === index) ?? false;
	}

	get classes(): number[] {
		return this.snapshot?.session.classes ?? [];
	}

	get done(): boolean {
		return (this.snapshot?.session.done ?? false) && this.queryCount === 0;
	}

	get queryCount(): number {
		return this.snapshot?.queries.length ?? 0;
	}

	/** Submit is enabled only when every queried point has a selection. */
	get canSubmit(): boolean {
		if (!this.snapshot || this.submitting || this.queryCount === 0) return false;
		return this.snapshot.queries.every((q) => this.pending.has(q.index));
	}

	/** Record a selection for a queried point; ignores non-batch indices. */
	select(index: number, label: number): void {
		if (!this.isQueried(index) || !this.classes.includes(label)) return;
		this.pending.set(index, label);
		this.advanceFocus(index);
		this.notify();
	}

	focus(index: number): void {
		if (this.isQueried(index)) {
			this.focused = index;
			this.notify();
		}
	}

	/** Move keyboard focus to the next unlabeled query after `from`. */
	private advanceFocus(from: number): void {
		const queries = this.snapshot?.queries ?? [];
		const start = queries.findIndex((q) => q.index === from);
		for (let step = 1; step <= queries.length; step++) {
			const q = queries[(start + step) % queries.length];
			if (q && !this.pending.has(q.index)) {
				this.focused = q.index;
				return;
			}
		}
		this.focused = from;
	}

	/** Keyboard shortcut: digit k assigns the k-th class to the focused query. */
	keyboardAssign(digit: number): void {
		const label = this.classes[digit];
		if (this.focused !== null && label !== undefined) {
			this.select(this.focused, label);
		}
	}

	/** POST the full batch; on success re-fetch, on rejection keep selections. */
	async submit(): Promise<void> {
		if (!this.canSubmit || !this.snapshot) return;
		const labels = this.snapshot.queries.map((q) => ({
			index: q.index,
			label: this.pending.get(q.index)!,
		}));
		this.submitting = true;
		this.notify();
		try {
			await this.api.submitLabels(labels);
			this.pending.clear();
			this.focused = null;
			await this.refresh();
		} catch (err) {
			if (err instanceof ApiError) {
				this.error = err.isConflict
					? `${err.message} — refresh to load the current batch`
					: err.message;
			} else {
				this.error = err instanceof Error ? err.message : String(err);
			}
		} finally {
			this.submitting = false;
			this.notify();
		}
	}
}
