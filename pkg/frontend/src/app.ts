/**
 * Dashboard state and rendering.
 *
 * The view is a pure projection of service responses: session status,
 * decisions and the responders-still-needed count all come from API
 * payloads, never from boundary logic re-implemented client side.
 * Mutations carry the last seen sequence number; on a conflict the
 * dashboard refetches and asks the operator to retry.
 */

import {
  ApiError,
  type BoundariesDoc,
  type DecisionDoc,
  type FinalReportDoc,
  type MonitorClient,
  type SessionDoc,
} from "./api";
import { buildBoundaryChart } from "./chart";

type BannerKind = "connection" | "not-found" | "conflict" | "error";

interface Banner {
  kind: BannerKind;
  message: string;
}

const STATUS_TEXT: Record<SessionDoc["status"], string> = {
  enrolling: "Enrolling",
  stopped_efficacy: "Stopped: efficacy shown",
  stopped_futility: "Stopped: futility",
  finalized: "Finalized",
};

const DECISION_TEXT: Record<DecisionDoc["decision"], string> = {
  continue: "Continue enrolling",
  stop_efficacy: "Stop the trial: efficacy threshold reached",
  stop_futility: "Stop the trial: success is no longer attainable (futility)",
};

export class Dashboard {
  private session: SessionDoc | null = null;
  private boundaries: BoundariesDoc | null = null;
  private sessions: SessionDoc[] = [];
  private banner: Banner | null = null;
  private modal: DecisionDoc | null = null;
  private pending: Promise<void> = Promise.resolve();

  constructor(
    private readonly root: HTMLElement,
    private readonly client: MonitorClient,
  ) {
    this.render();
    void this.track(() => this.refreshList());
  }

  /** Resolves once every queued action has finished (used by tests). */
  settle(): Promise<void> {
    return this.pending;
  }

  private track(action: () => Promise<void>): Promise<void> {
    const run = this.pending.then(action).catch((err) => this.fail(err));
    this.pending = run.then(
      () => undefined,
      () => undefined,
    );
    return this.pending;
  }

  private fail(err: unknown): void {
    if (err instanceof ApiError) {
      if (err.status === 0) {
        this.banner = { kind: "connection", message: "Service unreachable. Check that the monitor is running." };
      } else if (err.status === 404) {
        this.banner = { kind: "not-found", message: "No such session. It may have been created on another data directory." };
      } else if (err.status === 409) {
        this.banner = { kind: "conflict", message: "The session changed elsewhere. State reloaded; please retry." };
      } else {
        this.banner = { kind: "error", message: err.message };
      }
    } else {
      this.banner = { kind: "error", message: String(err) };
    }
    this.render();
  }

  // -- actions ----------------------------------------------------------

  createSession(params: { p0: number; p1: number; alpha: number; beta: number }): Promise<void> {
    return this.track(async () => {
      const session = await this.client.createSession(params);
      this.banner = null;
      this.modal = null;
      await this.open(session.id);
    });
  }

  openSession(id: string): Promise<void> {
    return this.track(async () => {
      this.banner = null;
      this.modal = null;
      await this.open(id);
    });
  }

  recordOutcome(responder: boolean): Promise<void> {
    return this.track(async () => {
      if (!this.session) return;
      const id = this.session.id;
      try {
        const result = await this.client.recordOutcome(id, responder, this.session.seq);
        this.session = result.session;
        this.banner = null;
        if (result.decision.decision !== "continue") {
          this.modal = result.decision;
        }
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          await this.open(id); // refetch, then surface the retry prompt
        }
        throw err;
      } finally {
        this.render();
      }
    });
  }

  undoLast(): Promise<void> {
    return this.track(async () => {
      if (!this.session) return;
      this.session = await this.client.undoLast(this.session.id);
      this.modal = null;
      this.banner = null;
      this.render();
    });
  }

  finalizeTrial(): Promise<void> {
    return this.track(async () => {
      if (!this.session) return;
      const result = await this.client.finalize(this.session.id);
      this.session = result.session;
      this.modal = null;
      this.banner = null;
      this.render();
    });
  }

  refresh(): Promise<void> {
    return this.track(async () => {
      if (this.session) await this.open(this.session.id);
      await this.refreshList();
    });
  }

  closeModal(): void {
    this.modal = null;
    this.render();
  }

  private async open(id: string): Promise<void> {
    this.session = await this.client.getSession(id);
    this.boundaries = await this.client.getBoundaries(id);
    await this.refreshList();
  }

  private async refreshList(): Promise<void> {
    this.sessions = await this.client.listSessions();
    this.render();
  }

  // -- rendering --------------------------------------------------------

  private render(): void {
    this.root.replaceChildren(
      this.renderBanner(),
      this.renderCreateForm(),
      this.renderSessionList(),
      this.renderSessionPanel(),
      this.renderModal(),
    );
  }

  private renderBanner(): HTMLElement {
    const host = div("banner-host");
    host.setAttribute("aria-live", "polite");
    if (this.banner) {
      const box = div(`banner banner-${this.banner.kind}`);
      box.dataset.role = "banner";
      box.dataset.kind = this.banner.kind;
      box.textContent = this.banner.message;
      host.append(box);
    }
    return host;
  }

  private renderCreateForm(): HTMLElement {
    const section = div("create-form");
    section.append(heading(2, "New monitored trial"));
    const fields: [string, string][] = [
      ["p0", "0.1"], ["p1", "0.35"], ["alpha", "0.025"], ["beta", "0.2"],
    ];
    const inputs: Record<string, HTMLInputElement> = {};
    for (const [name, preset] of fields) {
      const label = document.createElement("label");
      label.textContent = `${name} `;
      const input = document.createElement("input");
      input.name = name;
      input.value = preset;
      input.dataset.role = `create-${name}`;
      inputs[name] = input;
      label.append(input);
      section.append(label);
    }
    const button = document.createElement("button");
    button.textContent = "Create session";
    button.dataset.role = "create-session";
    button.addEventListener("click", () => {
      void this.createSession({
        p0: Number(inputs.p0?.value),
        p1: Number(inputs.p1?.value),
        alpha: Number(inputs.alpha?.value),
        beta: Number(inputs.beta?.value),
      });
    });
    section.append(button);
    return section;
  }

  private renderSessionList(): HTMLElement {
    const section = div("session-list");
    section.append(heading(2, `Sessions (${this.sessions.length})`));
    const list = document.createElement("ul");
    for (const s of this.sessions) {
      const item = document.createElement("li");
      const link = document.createElement("button");
      link.className = "session-link";
      link.dataset.role = "open-session";
      link.dataset.sessionId = s.id;
      link.textContent =
        `${s.id.slice(0, 8)} (p0=${s.hypotheses.p0}, p1=${s.hypotheses.p1}) ` +
        `${s.m}/${s.design.K} patients, ${STATUS_TEXT[s.status]}`;
      link.addEventListener("click", () => void this.openSession(s.id));
      item.append(link);
      list.append(item);
    }
    section.append(list);
    return section;
  }

  private renderSessionPanel(): HTMLElement {
    const section = div("session-panel");
    if (!this.session || !this.boundaries) return section;
    const s = this.session;

    const summary = div("summary");
    summary.dataset.role = "summary";
    const status = document.createElement("p");
    status.dataset.role = "status";
    status.textContent = `Status: ${STATUS_TEXT[s.status]}`;
    const progress = document.createElement("p");
    progress.dataset.role = "progress";
    progress.textContent =
      `Patients: ${s.m} of at most ${s.design.K}. Responders: ${s.s}. ` +
      `Threshold: ${s.design.u}.`;
    const needed = document.createElement("p");
    needed.dataset.role = "responders-needed";
    needed.textContent =
      s.status === "enrolling"
        ? `${s.responders_needed} more responder(s) needed for success.`
        : "Enrollment closed.";
    summary.append(heading(2, `Session ${s.id.slice(0, 8)}`), status, progress, needed);

    const chart = div("chart");
    chart.append(buildBoundaryChart(this.boundaries, s.outcomes));

    const controls = div("controls");
    const enrolling = s.status === "enrolling";
    controls.append(
      actionButton("record-responder", "Record responder", enrolling, () =>
        this.recordOutcome(true)),
      actionButton("record-nonresponder", "Record non-responder", enrolling, () =>
        this.recordOutcome(false)),
      actionButton("undo", "Undo last entry", s.m > 0, () => this.undoLast()),
      actionButton("refresh", "Refresh", true, () => this.refresh()),
    );
    if (!enrolling && s.status !== "finalized") {
      controls.append(
        actionButton("finalize", "Finalize report", true, () => this.finalizeTrial()),
      );
    }

    section.append(summary, chart, controls);
    if (s.final_report) section.append(renderReport(s.final_report));
    return section;
  }

  private renderModal(): HTMLElement {
    const host = div("modal-host");
    if (!this.modal) return host;
    const overlay = div("modal-overlay");
    const modal = div("modal");
    modal.dataset.role = "stop-modal";
    modal.dataset.decision = this.modal.decision;
    modal.setAttribute("role", "alertdialog");
    const title = heading(2, DECISION_TEXT[this.modal.decision]);
    const detail = document.createElement("p");
    detail.dataset.role = "stop-detail";
    detail.textContent =
      `Stopped after patient ${this.modal.m} with ${this.modal.s} responder(s).`;
    const finalize = actionButton("modal-finalize", "Finalize report", true, () =>
      this.finalizeTrial());
    const close = document.createElement("button");
    close.dataset.role = "modal-close";
    close.textContent = "Close";
    close.addEventListener("click", () => this.closeModal());
    modal.append(title, detail, finalize, close);
    overlay.append(modal);
    host.append(overlay);
    return host;
  }
}

function div(className: string): HTMLDivElement {
  const node = document.createElement("div");
  node.className = className;
  return node;
}

function heading(level: 2 | 3, text: string): HTMLHeadingElement {
  const node = document.createElement(`h${level}`) as HTMLHeadingElement;
  node.textContent = text;
  return node;
}

function actionButton(
  role: string,
  label: string,
  enabled: boolean,
  onClick: () => Promise<void>,
): HTMLButtonElement {
  const button = document.createElement("button");
  button.dataset.role = role;
  button.textContent = label;
  button.disabled = !enabled;
  button.addEventListener("click", () => void onClick());
  return button;
}

function renderReport(report: FinalReportDoc): HTMLElement {
  const section = div("final-report");
  section.dataset.role = "final-report";
  section.append(heading(2, "Final report"));
  const estimates = document.createElement("dl");
  const entries: [string, string, number][] = [
    ["naive", "Naive estimate", report.estimates.naive],
    ["bias-adjusted", "Bias-adjusted estimate", report.estimates.bias_adjusted],
    ["mue", "Median unbiased estimate", report.estimates.mue],
  ];
  for (const [role, label, value] of entries) {
    const term = document.createElement("dt");
    term.textContent = label;
    const val = document.createElement("dd");
    val.dataset.role = `estimate-${role}`;
    val.textContent = value.toFixed(4);
    estimates.append(term, val);
  }
  section.append(estimates, heading(3, "95% confidence intervals"));
  const table = document.createElement("table");
  for (const [method, interval] of Object.entries(report.intervals)) {
    const row = document.createElement("tr");
    const name = document.createElement("td");
    name.textContent = method;
    const range = document.createElement("td");
    range.dataset.role = `interval-${method}`;
    range.textContent = `(${interval.lower.toFixed(4)}, ${interval.upper.toFixed(4)})`;
    row.append(name, range);
    table.append(row);
  }
  section.append(table);
  return section;
}
