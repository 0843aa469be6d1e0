// Acceptance: against a live service on the reference checkpoint, a slider
// scrub from t=0 to t=1 in transfer mode renders endpoint frames that match
// the CLI-produced images byte-for-byte after identical quantization; the
// request audit shows at most one request per 100 ms window and no stale
// response ever renders.

import { spawn, spawnSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { Client } from "../src/api.js";
import { DebouncedRequester, realClock } from "../src/debounce.js";
import { grayBytes } from "../src/render.js";
import { UiSession } from "../src/state.js";

const repoRoot = resolve(__dirname, "..", "..");
const ckpt = join(repoRoot, "tests", "data", "reference", "model.ckpt");
const haveBackend =
  existsSync(ckpt) && spawnSync("python3", ["--version"]).status === 0;

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

function python(args: string[], cwd = repoRoot): string {
  const res = spawnSync("python3", args, { cwd, encoding: "utf-8" });
  if (res.status !== 0) {
    throw new Error(`python3 ${args.join(" ")} failed: ${res.stderr}`);
  }
  return res.stdout;
}

describe.skipIf(!haveBackend)("explorer against the live service", () => {
  let proc: ReturnType<typeof spawn>;
  let client: Client;
  let workDir: string;

  beforeAll(async () => {
    workDir = mkdtempSync(join(tmpdir(), "segma-ui-"));
    // benchmark test rows as the input pool for both the UI and the CLI
    python([
      "-c",
      [
        "import numpy as np",
        "from segma.data import synthetic_benchmark",
        "_, test_x, _ = synthetic_benchmark(seed=0)",
        `np.save(r'${join(workDir, "x.npy")}', test_x)`,
      ].join("\n"),
    ]);

    proc = spawn("python3", ["-m", "segma.cli", "serve", "--ckpt", ckpt, "--port", "0"], {
      cwd: repoRoot,
    });
    const port = await new Promise<number>((resolvePort, rejectPort) => {
      const timer = setTimeout(() => rejectPort(new Error("service did not start")), 20000);
      proc.stdout!.on("data", (chunk: Buffer) => {
        const match = /http:\/\/[^:]+:(\d+)/.exec(chunk.toString());
        if (match) {
          clearTimeout(timer);
          resolvePort(Number(match[1]));
        }
      });
      proc.on("exit", (code) => rejectPort(new Error(`service exited early (${code})`)));
    });
    client = new Client(`http://127.0.0.1:${port}`);
  }, 30000);

  afterAll(() => {
    proc?.kill();
  });

  it("sees the reference model", async () => {
    const info = await client.modelInfo();
    expect(info.latent_dim).toBe(10);
    expect(info.classes).toEqual([1, 2, 3]);
    expect(info.input_shape).toEqual([20]);
  });

  it("scrub endpoints match CLI frames byte-for-byte; audits hold", async () => {
    const info = await client.modelInfo();
    const session = new UiSession(info);

    const x = JSON.parse(
      python(["-c", `import numpy as np, json; print(json.dumps(np.load(r'${join(workDir, "x.npy")}')[0].tolist()))`]),
    ) as number[];
    const enc = await client.encode(x);
    session.setCode(enc.z, enc.class);
    session.pickClass("source", enc.class);
    const target = (enc.class % 3) + 1;
    session.pickClass("target", target);

    // CLI route: same row, inferred source, same target, two steps
    const pathNpy = join(workDir, "cli_path.npy");
    python([
      "-m", "segma.cli", "transfer",
      "--ckpt", ckpt,
      "--data", join(workDir, "x.npy"),
      "--index", "0",
      "--target", String(target),
      "--steps", "2",
      "--out", pathNpy,
    ]);
    const cliFrames = JSON.parse(
      python(["-c", `import numpy as np, json; print(json.dumps(np.load(r'${pathNpy}').tolist()))`]),
    ) as number[][];
    expect(cliFrames).toHaveLength(2);

    // UI route: debounced /decode of the lerped code, scrubbed 0 -> 1
    const rendered: Array<{ t: number; x: number[] }> = [];
    let currentT = 0;
    const pipeline = new DebouncedRequester<{ x: number[] }>(
      (resp) => rendered.push({ t: currentT, x: resp.x }),
      (err) => {
        throw err;
      },
      100,
      realClock,
    );

    const scrub = async (t: number) => {
      session.t = t;
      currentT = t;
      const code = session.codeAtT();
      pipeline.schedule(() => client.decode(code));
    };

    await scrub(0);
    await sleep(150); // let the t=0 frame land before scrubbing
    for (let i = 1; i <= 25; i++) {
      await scrub(i / 25);
      await sleep(20); // 50 events per second, far faster than the window
    }
    await sleep(400); // settle

    // endpoint frames byte-for-byte against the CLI after the same quantization
    const first = rendered[0];
    const last = rendered[rendered.length - 1];
    expect(first.t).toBe(0);
    expect(last.t).toBe(1);
    expect(Array.from(grayBytes(first.x))).toEqual(Array.from(grayBytes(cliFrames[0])));
    expect(Array.from(grayBytes(last.x))).toEqual(Array.from(grayBytes(cliFrames[1])));
    // the doubles agree to the last couple of ulps (BLAS rounds 1-row and
    // 2-row matmuls differently; JSON itself is lossless)
    for (const [got, want] of [
      [first.x, cliFrames[0]],
      [last.x, cliFrames[1]],
    ]) {
      for (let i = 0; i < want.length; i++) {
        expect(Math.abs(got[i] - want[i])).toBeLessThan(1e-12);
      }
    }

    // debounce audit: no two requests within one window
    expect(pipeline.auditWindowsOk()).toBe(true);
    // every rendered frame corresponds to exactly one response, in order
    const renderedAudits = pipeline.audit.filter((a) => a.outcome === "rendered");
    expect(renderedAudits.length).toBe(rendered.length);
    const seqs = renderedAudits.map((a) => a.seq);
    expect([...seqs].sort((a, b) => a - b)).toEqual(seqs);
    // stale or superseded responses never rendered
    expect(pipeline.audit.filter((a) => a.outcome === "stale").every((a) => a.seq >= 0)).toBe(true);
  }, 30000);

  it("intensity endpoint drives the alpha slider", async () => {
    const info = await client.modelInfo();
    const session = new UiSession(info);
    const { xs } = await client.sample(1, 1, 5);
    const enc = await client.encode(xs[0]);
    session.setCode(enc.z, enc.class);
    session.pickClass("source", enc.class);
    const anti = (enc.class % 3) + 1;
    session.alpha = 0.5;
    const resp = await client.intensity(session.z!, enc.class, anti, session.alpha);
    expect(resp.x).toHaveLength(20);
    const sum = resp.posterior.reduce((a, b) => a + b, 0);
    expect(Math.abs(sum - 1)).toBeLessThan(1e-9);
    // pushing away from the anti-target cannot raise its posterior
    expect(resp.posterior[anti - 1]).toBeLessThanOrEqual(enc.posterior[anti - 1] + 1e-12);
  });
});
