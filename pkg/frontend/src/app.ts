/** Application controller: holds the fetched state and the operations the
 * widgets call. Takes an injectable fetch so tests can run it against an
 * in-memory backend.
 */

import {
  ApiClient,
  type ContextsResponse,
  type Decision,
  type DecisionResponse,
  type FetchLike,
  type NetworkResponse,
  type QueuePage,
  type StatsResponse,
} from "./api.js";
import { captionText, filterForSlider } from "./model.js";

export class CurationApp {
  readonly api: ApiClient;
  actor = "";
  slider = 1;
  stats: StatsResponse | null = null;
  queue: QueuePage | null = null;
  network: NetworkResponse | null = null;
  contexts: ContextsResponse | null = null;

  constructor(fetchFn?: FetchLike) {
    this.api = new ApiClient(fetchFn);
  }

  /** Load stats first (it defines the default filter), then the queue and
   * the network at that filter.
   */
  async init(): Promise<void> {
    this.stats = await this.api.getStats();
    const initial =
      this.stats.default_filter.kind === "min_days"
        ? this.stats.default_filter.value
        : 1;
    await Promise.all([this.refreshQueue(), this.setSlider(initial)]);
  }

  async refreshQueue(): Promise<QueuePage> {
    this.queue = await this.api.getQueue();
    return this.queue;
  }

  async setSlider(value: number): Promise<NetworkResponse> {
    const filter = filterForSlider(value);
    this.slider = filter.value;
    this.network = await this.api.getNetwork(filter.value);
    return this.network;
  }

  renderedCount(): number {
    return this.network ? this.network.nodes.length : 0;
  }

  fullCount(): number {
    if (this.stats) return this.stats.full_nodes;
    return this.network ? this.network.full_nodes : 0;
  }

  caption(): string {
    if (!this.network) return "";
    return captionText(
      this.fullCount(),
      this.network.nodes.length,
      this.network.agreement,
    );
  }

  /** Apply a curation decision. Attribution and rationale are enforced here
   * as well as server-side so the user gets the message before a request is
   * made. On success every cached view is refetched: the server bumps its
   * alias version, so stale state would otherwise linger until reload.
   */
  async submitDecision(
    decision: Decision,
    rationale: string,
  ): Promise<DecisionResponse> {
    const actor = this.actor.trim();
    if (!actor) {
      throw new Error("enter your name first: decisions are attributed");
    }
    const why = rationale.trim();
    if (!why) {
      throw new Error("a rationale is required for every decision");
    }
    const res = await this.api.postDecision(decision, actor, why);
    this.stats = await this.api.getStats();
    await Promise.all([this.refreshQueue(), this.setSlider(this.slider)]);
    return res;
  }

  async openContexts(entityId: string, limit = 30): Promise<ContextsResponse> {
    this.contexts = await this.api.getContexts(entityId, limit);
    return this.contexts;
  }
}
