import { afterAll, beforeAll, expect, test } from "vitest";

import { MonitorClient } from "../src/api";
import { Dashboard } from "../src/app";
import { startService, type ServiceHandle } from "./service-fixture";

let service: ServiceHandle;

beforeAll(async () => {
  service = await startService();
});

afterAll(() => service.stop());

function mount(baseUrl = ""): { dash: Dashboard; root: HTMLElement } {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app") as HTMLElement;
  const dash = new Dashboard(root, new MonitorClient(baseUrl || service.baseUrl));
  return { dash, root };
}

function find<T extends Element>(root: HTMLElement, role: string): T {
  const node = root.querySelector(`[data-role="${role}"]`);
  expect(node, `missing element with data-role=${role}`).not.toBeNull();
  return node as T;
}

function click(root: HTMLElement, role: string): void {
  find<HTMLButtonElement>(root, role).click();
}

async function createSession(
  dash: Dashboard,
  root: HTMLElement,
  p0: string,
  p1: string,
): Promise<void> {
  await dash.settle();
  find<HTMLInputElement>(root, "create-p0").value = p0;
  find<HTMLInputElement>(root, "create-p1").value = p1;
  click(root, "create-session");
  await dash.settle();
}

test("futility flow: 17 straight non-responses on a (0.1, 0.35) trial", async () => {
  const { dash, root } = mount();
  await createSession(dash, root, "0.1", "0.35");

  // boundary chart renders the threshold line at 6 and the 0..5 staircase
  const line = find<SVGLineElement>(root, "efficacy-line");
  expect(line.dataset.threshold).toBe("6");
  const stairs = find<SVGPolylineElement>(root, "futility-staircase");
  expect(stairs.dataset.steps).toBe("0,1,2,3,4,5");
  expect(stairs.dataset.stages).toBe("17,18,19,20,21,22");

  // fresh session: trajectory at the origin, six responders needed
  expect(find(root, "trajectory").getAttribute("data-points")).toBe("0:0");
  expect(find(root, "responders-needed").textContent).toContain("6 more responder");

  // sixteen non-responses keep the trial enrolling, no modal
  for (let patient = 1; patient <= 16; patient += 1) {
    click(root, "record-nonresponder");
    await dash.settle();
    expect(root.querySelector('[data-role="stop-modal"]')).toBeNull();
  }
  expect(find(root, "status").textContent).toContain("Enrolling");

  // the seventeenth triggers the futility-stop modal
  click(root, "record-nonresponder");
  await dash.settle();
  const modal = find<HTMLElement>(root, "stop-modal");
  expect(modal.dataset.decision).toBe("stop_futility");
  expect(modal.textContent).toContain("futility");
  expect(find(root, "stop-detail").textContent).toContain("patient 17");

  // finalizing from the modal shows the report with a zero naive estimate
  click(root, "modal-finalize");
  await dash.settle();
  expect(root.querySelector('[data-role="stop-modal"]')).toBeNull();
  expect(find(root, "estimate-naive").textContent).toBe("0.0000");
  expect(find(root, "status").textContent).toContain("Finalized");

  // outcome entry is disabled once stopped
  expect(find<HTMLButtonElement>(root, "record-responder").disabled).toBe(true);
  expect(find<HTMLButtonElement>(root, "record-nonresponder").disabled).toBe(true);
});

test("efficacy stop surfaces its own modal and needed-count hits zero", async () => {
  const { dash, root } = mount();
  await createSession(dash, root, "0.1", "0.55"); // design u=4, K=9

  for (let i = 0; i < 3; i += 1) {
    click(root, "record-responder");
    await dash.settle();
  }
  expect(find(root, "responders-needed").textContent).toContain("1 more responder");
  click(root, "record-responder");
  await dash.settle();
  const modal = find<HTMLElement>(root, "stop-modal");
  expect(modal.dataset.decision).toBe("stop_efficacy");
  expect(find(root, "responders-needed").textContent).toContain("Enrollment closed");
});

test("undo reverts the last entry and the chart point", async () => {
  const { dash, root } = mount();
  await createSession(dash, root, "0.1", "0.55");

  click(root, "record-responder");
  await dash.settle();
  expect(find(root, "trajectory").getAttribute("data-points")).toBe("0:0 1:1");

  click(root, "undo");
  await dash.settle();
  expect(find(root, "trajectory").getAttribute("data-points")).toBe("0:0");
  expect(find(root, "progress").textContent).toContain("Patients: 0");
});

test("stale writers get a conflict banner and a refreshed view", async () => {
  const first = mount();
  await createSession(first.dash, first.root, "0.1", "0.55");
  const sessionId = find<HTMLElement>(first.root, "summary")
    .querySelector("h2")!
    .textContent!.replace("Session ", "");

  // a second operator opens the same session and records first
  const second = mount();
  await second.dash.settle();
  const link = second.root.querySelector(
    `[data-role="open-session"][data-session-id^="${sessionId}"]`,
  ) as HTMLButtonElement;
  expect(link).not.toBeNull();
  link.click();
  await second.dash.settle();
  click(second.root, "record-responder");
  await second.dash.settle();

  // the first dashboard now holds a stale sequence number
  click(first.root, "record-responder");
  await first.dash.settle();
  const banner = find<HTMLElement>(first.root, "banner");
  expect(banner.dataset.kind).toBe("conflict");
  // the view was refetched: the other operator's outcome is visible
  expect(find(first.root, "progress").textContent).toContain("Patients: 1");
});

test("unknown sessions and unreachable services show distinct banners", async () => {
  const { dash, root } = mount();
  await dash.settle();
  await dash.openSession("does-not-exist");
  expect(find<HTMLElement>(root, "banner").dataset.kind).toBe("not-found");

  const dead = mount("http://127.0.0.1:9");
  await dead.dash.settle();
  expect(find<HTMLElement>(dead.root, "banner").dataset.kind).toBe("connection");
});
