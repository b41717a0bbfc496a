/** Browser wiring: twin Poincare disks, the FN selector, steering
 * controls, and the energy/tension sparklines.  All geometry and frame
 * construction lives in the pure modules; this file only touches the
 * DOM and the canvas.
 */

import { ServiceClient, parseSnapshotFile } from "./client.js";
import { defaultDraft, parseField, toStartPayload, validateDraft, withGenus } from "./fnForm.js";
import { toPixels, orthogonalityErrorPx } from "./geometry.js";
import { DEFAULT_OPTIONS, Frame, Primitive, RenderOptions, renderFrame, sparkline } from "./scene.js";
import { GeometryPayload, METHODS, RunConfigDraft, SnapshotRecord } from "./types.js";

const COLORS: Record<string, string> = {
  mesh: "#4878b0",
  polygon: "#222222",
  axis: "#3aa0dd",
  highlight: "#1133cc",
  fundamental: "rgba(255, 240, 160, 0.45)",
  matched: "rgba(40, 80, 255, 0.35)",
  vertex: "#333333",
  image: "#aa3311",
};

function drawFrame(
  canvas: HTMLCanvasElement,
  frame: Frame,
  side: "domain" | "target",
): void {
  const ctx = canvas.getContext("2d")!;
  const { width, height } = canvas;
  const radius = Math.min(width, height) / 2 - 8;
  ctx.clearRect(0, 0, width, height);
  ctx.beginPath();
  ctx.arc(width / 2, height / 2, radius, 0, 2 * Math.PI);
  ctx.strokeStyle = "#000";
  ctx.lineWidth = 1.2;
  ctx.stroke();

  const px = (p: [number, number]) => toPixels(p, width, height);
  for (const prim of frame.primitives) {
    if (prim.side !== side) continue;
    if (prim.kind === "region") {
      ctx.beginPath();
      prim.corners.forEach((c, i) => {
        const [x, y] = px(c);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.closePath();
      ctx.fillStyle = COLORS[prim.role];
      ctx.fill();
    } else if (prim.kind === "edge") {
      ctx.beginPath();
      const seg = prim.segment;
      if (seg.kind === "chord") {
        ctx.moveTo(...px(seg.from));
        ctx.lineTo(...px(seg.to));
      } else {
        // scale the arc to pixel coordinates (y flips, so the sweep flips)
        const [cx, cy] = px(seg.center);
        ctx.arc(cx, cy, seg.radius * radius, -seg.startAngle, -seg.endAngle, !seg.anticlockwise);
      }
      ctx.strokeStyle = COLORS[prim.role];
      ctx.lineWidth = prim.role === "highlight" ? 2.0 : prim.role === "axis" ? 1.0 : 0.5;
      ctx.stroke();
    } else {
      const [x, y] = px(prim.at);
      ctx.beginPath();
      ctx.arc(x, y, 1.6, 0, 2 * Math.PI);
      ctx.fillStyle = COLORS[prim.role];
      ctx.fill();
    }
  }
}

function drawSpark(canvas: HTMLCanvasElement, series: number[], color: string): void {
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pts = sparkline(series, canvas.width, canvas.height - 2);
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y + 1) : ctx.lineTo(x, y + 1)));
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.2;
  ctx.stroke();
}

export function mountApp(root: HTMLElement, base = ""): ServiceClient {
  root.innerHTML = `
  <div class="hf-app">
    <div class="hf-disks">
      <div><h3>domain</h3><canvas id="hf-dom" width="420" height="420"></canvas></div>
      <div><h3>target <span id="hf-stale" class="hf-badge" hidden>stale</span></h3>
        <canvas id="hf-tgt" width="420" height="420"></canvas></div>
    </div>
    <div class="hf-status">
      <span id="hf-iter">iteration -</span>
      <span id="hf-energy">energy -</span>
      <span id="hf-tension">tension -</span>
      <span id="hf-method">method -</span>
      <canvas id="hf-spark-e" width="220" height="36"></canvas>
      <canvas id="hf-spark-t" width="220" height="36"></canvas>
    </div>
    <div class="hf-controls">
      <button id="hf-start">start</button>
      <button id="hf-pause">pause</button>
      <button id="hf-resume">resume</button>
      <button id="hf-reset">reset</button>
      <select id="hf-method-sel">${METHODS.map((m) => `<option>${m}</option>`).join("")}</select>
      <label>stepsize <input id="hf-step" type="range" min="-7" max="-1" step="0.1" value="-3">
        <span id="hf-step-val">1e-3</span></label>
      <label><input type="checkbox" id="hf-show-mesh" checked> mesh</label>
      <label><input type="checkbox" id="hf-show-dom" checked> fundamental domain</label>
      <label><input type="checkbox" id="hf-show-axes" checked> axes</label>
      <label>replay file <input type="file" id="hf-replay"></label>
    </div>
    <form id="hf-form" class="hf-form"></form>
    <div id="hf-errors" class="hf-errors"></div>
    <div id="hf-toast" class="hf-toast" hidden></div>
  </div>`;

  const els = {
    dom: root.querySelector<HTMLCanvasElement>("#hf-dom")!,
    tgt: root.querySelector<HTMLCanvasElement>("#hf-tgt")!,
    stale: root.querySelector<HTMLElement>("#hf-stale")!,
    iter: root.querySelector<HTMLElement>("#hf-iter")!,
    energy: root.querySelector<HTMLElement>("#hf-energy")!,
    tension: root.querySelector<HTMLElement>("#hf-tension")!,
    method: root.querySelector<HTMLElement>("#hf-method")!,
    sparkE: root.querySelector<HTMLCanvasElement>("#hf-spark-e")!,
    sparkT: root.querySelector<HTMLCanvasElement>("#hf-spark-t")!,
    form: root.querySelector<HTMLFormElement>("#hf-form")!,
    errors: root.querySelector<HTMLElement>("#hf-errors")!,
    toast: root.querySelector<HTMLElement>("#hf-toast")!,
  };

  const client = new ServiceClient(
    base,
    async (url, body) => (await fetch(url, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    })).json(),
    async (url) => (await fetch(url)).json(),
    (url, onRecord, onError) => {
      const es = new EventSource(url);
      es.onmessage = (ev) => onRecord(ev.data);
      es.onerror = () => onError();
      return { close: () => es.close() };
    },
  );

  let geometry: GeometryPayload = { ready: false };
  let options: RenderOptions = { ...DEFAULT_OPTIONS };
  let draft: RunConfigDraft = defaultDraft(2);
  draft.domain_lengths = [2, 2, 0.5];
  draft.domain_twists = [-1.5, 2, 0.5];
  draft.target_lengths = [2, 2, 1.5];
  draft.target_twists = [-1.5, 2, 0.5];

  const toast = (text: string) => {
    els.toast.textContent = text;
    els.toast.hidden = false;
    setTimeout(() => (els.toast.hidden = true), 4000);
  };

  const redraw = () => {
    const rec = client.state.lastRecord;
    if (!rec) return;
    const frame = renderFrame(geometry, rec, options);
    // orthogonality self-check: surface any arc off the boundary by > 1px
    const radiusPx = Math.min(els.dom.width, els.dom.height) / 2 - 8;
    for (const prim of frame.primitives) {
      if (prim.kind === "edge" && orthogonalityErrorPx(prim.segment, radiusPx) > 1) {
        console.warn("geodesic arc misses orthogonality by > 1px", prim);
      }
    }
    drawFrame(els.dom, frame, "domain");
    drawFrame(els.tgt, frame, "target");
    els.iter.textContent = `iteration ${frame.iteration}`;
    els.energy.textContent = `energy ${frame.energy.toFixed(9)}`;
    els.tension.textContent = `tension ${frame.tensionNorm.toExponential(2)}`;
    els.method.textContent = `method ${frame.method}`;
    drawSpark(els.sparkE, client.state.energySeries, "#aa3311");
    drawSpark(els.sparkT, client.state.tensionSeries, "#4878b0");
  };

  client.onChange((s) => {
    els.stale.hidden = !s.stale;
    redraw();
  });

  const renderForm = () => {
    const n = draft.domain_lengths.length;
    const row = (name: keyof RunConfigDraft, label: string) => {
      const xs = draft[name] as number[];
      return `<fieldset><legend>${label}</legend>${xs
        .map((x, i) => `<input data-field="${String(name)}" data-index="${i}" value="${x}">`)
        .join("")}</fieldset>`;
    };
    els.form.innerHTML = `
      <label>genus <input id="hf-genus" type="number" min="2" value="${draft.genus}"></label>
      ${row("domain_lengths", `domain lengths (${n})`)}
      ${row("domain_twists", "domain twists")}
      ${row("target_lengths", "target lengths")}
      ${row("target_twists", "target twists")}
      <label>depth <input id="hf-depth" type="number" min="0" value="${draft.depth}"></label>`;
    els.form.querySelector<HTMLInputElement>("#hf-genus")!.onchange = (ev) => {
      draft = withGenus(draft, Number((ev.target as HTMLInputElement).value));
      renderForm();
    };
    els.form.querySelector<HTMLInputElement>("#hf-depth")!.onchange = (ev) => {
      draft.depth = Number((ev.target as HTMLInputElement).value);
    };
    els.form.querySelectorAll<HTMLInputElement>("input[data-field]").forEach((inp) => {
      inp.onchange = () => {
        const value = parseField(inp.value);
        const field = inp.dataset.field as keyof RunConfigDraft;
        const idx = Number(inp.dataset.index);
        if (value !== null) (draft[field] as number[])[idx] = value;
        showErrors();
      };
    });
  };

  const showErrors = () => {
    const errors = validateDraft(draft);
    els.errors.textContent = errors.map((e) => `${e.field}: ${e.message}`).join(" | ");
    return errors;
  };

  renderForm();

  root.querySelector<HTMLButtonElement>("#hf-start")!.onclick = async () => {
    if (showErrors().length > 0) return; // submission blocked
    const payload = toStartPayload(draft);
    const ack = await client.control(payload);
    if (!ack.ok) {
      toast(ack.error ?? "start rejected");
      return;
    }
    geometry = await pollGeometry();
    client.connect();
  };
  const pollGeometry = async (): Promise<GeometryPayload> => {
    for (let k = 0; k < 120; k++) {
      const g = await client.geometry();
      if (g.ready) return g;
      await new Promise((res) => setTimeout(res, 500));
    }
    toast("geometry never became ready");
    return { ready: false };
  };

  const steer = (action: () => Promise<unknown>) => async () => {
    const ack = (await action()) as { ok: boolean; error?: string };
    if (!ack.ok) toast(ack.error ?? "rejected");
  };
  root.querySelector<HTMLButtonElement>("#hf-pause")!.onclick = steer(() => client.pause());
  root.querySelector<HTMLButtonElement>("#hf-resume")!.onclick = steer(() => client.resume());
  root.querySelector<HTMLButtonElement>("#hf-reset")!.onclick = steer(() => client.reset());
  root.querySelector<HTMLSelectElement>("#hf-method-sel")!.onchange = (ev) =>
    steer(() => client.setMethod((ev.target as HTMLSelectElement).value))();
  const stepInput = root.querySelector<HTMLInputElement>("#hf-step")!;
  stepInput.onchange = () => {
    const value = Math.pow(10, Number(stepInput.value));
    root.querySelector<HTMLElement>("#hf-step-val")!.textContent = value.toExponential(1);
    steer(() => client.setStepsize(value))();
  };

  for (const [id, key] of [
    ["hf-show-mesh", "showMesh"],
    ["hf-show-dom", "showFundamentalDomain"],
    ["hf-show-axes", "showAxes"],
  ] as const) {
    root.querySelector<HTMLInputElement>(`#${id}`)!.onchange = (ev) => {
      options = { ...options, [key]: (ev.target as HTMLInputElement).checked };
      redraw();
    };
  }

  // hover: highlight the matched triangle on both disks
  els.dom.onmousemove = (ev) => {
    if (!geometry.ready || !geometry.triangles) return;
    const rect = els.dom.getBoundingClientRect();
    const w = els.dom.width;
    const h = els.dom.height;
    const r = Math.min(w, h) / 2 - 8;
    const x = ((ev.clientX - rect.left) - w / 2) / r;
    const y = (h / 2 - (ev.clientY - rect.top)) / r;
    let hit: number | null = null;
    for (const [t, tri] of geometry.triangles.entries()) {
      const corners = tri.disk.map((p): [number, number] => [p[0], p[1]]);
      if (pointInTri([x, y], corners)) {
        hit = t;
        break;
      }
    }
    if (hit !== options.highlightTriangle) {
      options = { ...options, highlightTriangle: hit };
      redraw();
    }
  };

  // offline replay: render a recorded snapshot file frame by frame
  root.querySelector<HTMLInputElement>("#hf-replay")!.onchange = async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    client.disconnect();
    geometry = await pollGeometry();
    const lines = parseSnapshotFile(await file.text());
    client.state.lastIteration = null;
    for (const line of lines) {
      client.ingest(line);
      await new Promise((res) => setTimeout(res, 40));
    }
  };

  return client;
}

import { pointInTriangle as pointInTri } from "./geometry.js";
