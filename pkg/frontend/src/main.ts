import { MonitorClient } from "./api";
import { Dashboard } from "./app";

const apiBase =
  new URLSearchParams(window.location.search).get("api") ?? window.location.origin;

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const dashboard = new Dashboard(root, new MonitorClient(apiBase));

const sessionId = window.location.hash.replace(/^#\/?/, "");
if (sessionId) void dashboard.openSession(sessionId);
