// Spawn the real difflab server over a freshly built fixture repository.

import { execFileSync, spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

export interface Fixture {
  campaign: string;
  wrong: number;
  records: number;
  configs: string[];
  tests: string[];
}

export interface TestServer {
  base: string;
  fixture: Fixture;
  stop: () => void;
}

const HERE = dirname(fileURLToPath(import.meta.url));

export function pageSkeleton(): string {
  const html = readFileSync(join(HERE, "..", "index.html"), "utf-8");
  const body = /<body>([\s\S]*)<\/body>/.exec(html);
  if (!body) throw new Error("index.html has no <body>");
  return body[1];
}

async function waitReady(base: string, child: ChildProcess): Promise<void> {
  const deadline = Date.now() + 30_000;
  let lastError = "";
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(`server exited early with code ${child.exitCode}`);
    }
    try {
      const resp = await fetch(`${base}/api/campaigns`);
      if (resp.ok) return;
      lastError = `status ${resp.status}`;
    } catch (err) {
      lastError = String(err);
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error(`server not ready: ${lastError}`);
}

export async function startServer(): Promise<TestServer> {
  const repo = mkdtempSync(join(tmpdir(), "viewer-fixture-"));
  const raw = execFileSync("python3", [join(HERE, "fixture.py"), "--repo", repo], {
    encoding: "utf-8",
    timeout: 110_000,
  });
  const fixture = JSON.parse(raw) as Fixture;

  const port = 8930 + (process.pid % 50);
  const base = `http://127.0.0.1:${port}`;
  const child = spawn("difflab", ["serve", "--repo", repo, "--port", String(port)], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  try {
    await waitReady(base, child);
  } catch (err) {
    child.kill();
    rmSync(repo, { recursive: true, force: true });
    throw err;
  }

  return {
    base,
    fixture,
    stop: () => {
      child.kill();
      rmSync(repo, { recursive: true, force: true });
    },
  };
}
