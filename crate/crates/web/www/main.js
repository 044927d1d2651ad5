// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

import init, { intro_transition, nilpotent_growth, delta_turnover } from "./pkg/adiabat_web.js";

const EPS = new Float64Array([0.1, 0.07, 0.05, 0.035, 0.025, 0.018, 0.013, 0.01]);

// Scatter points and/or a polyline on a canvas with simple axes.
function plot(canvas, series, xlabel, ylabel, marker) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 44;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap(s => s.x), ys = series.flatMap(s => s.y).filter(Number.isFinite);
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const px = x => pad + (x - x0) / (x1 - x0) * (w - 2 * pad);
  const py = y => h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(x1.toPrecision(3), w - pad - 24, h - pad + 14);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(xlabel, w / 2 - 20, h - 8);
  ctx.fillText(ylabel, pad, pad - 8);
  for (const s of series) {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    if (s.line) {
      ctx.beginPath();
      s.x.forEach((x, i) => (i ? ctx.lineTo(px(x), py(s.y[i])) : ctx.moveTo(px(x), py(s.y[i]))));
      ctx.stroke();
    }
    if (s.dots) {
      s.x.forEach((x, i) => {
        ctx.beginPath();
        ctx.arc(px(x), py(s.y[i]), 3.5, 0, 2 * Math.PI);
        ctx.fill();
      });
    }
  }
  if (marker) {
    ctx.strokeStyle = "#c60";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(px(marker), pad);
    ctx.lineTo(px(marker), h - pad);
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

// Splits [ε, ln num, ln closed]* into plot series against 1/√ε.
function curves(flat) {
  const x = [], num = [], closed = [];
  for (let i = 0; i < flat.length; i += 3) {
    x.push(1 / Math.sqrt(flat[i]));
    num.push(flat[i + 1]);
    closed.push(flat[i + 2]);
  }
  return [
    { x, y: closed, color: "#36c", line: true },
    { x, y: num, color: "#111", dots: true },
  ];
}

async function timed(statusId, work) {
  const el = document.getElementById(statusId);
  el.className = "status";
  el.textContent = "running…";
  // let the status paint before the synchronous wasm call
  await new Promise(r => setTimeout(r, 20));
  const t = performance.now();
  try {
    work();
    el.textContent = `${((performance.now() - t) / 1000).toFixed(2)} s`;
  } catch (e) {
    el.className = "status err";
    el.textContent = String(e.message ?? e);
  }
}

const val = id => parseFloat(document.getElementById(id).value);

function runIntro() {
  return timed("intro-status", () => {
    const flat = intro_transition(val("intro-a"), val("intro-k"), EPS);
    plot(document.getElementById("intro-plot"), curves(flat), "1/√ε", "ln ‖transition‖");
  });
}

function runNilpotent() {
  return timed("nil-status", () => {
    const flat = nilpotent_growth(EPS);
    plot(document.getElementById("nil-plot"), curves(flat), "1/√ε", "ln ‖Y(1,0)‖");
  });
}

function runTurnover() {
  return timed("turn-status", () => {
    const out = delta_turnover(val("turn-delta"), 1.0, val("turn-eps"), 16);
    const qStar = out[out.length - 1];
    const deltas = Array.from(out.slice(0, -1));
    const x = deltas.map((_, q) => q);
    const y = deltas.map(d => Math.log10(d));
    plot(document.getElementById("turn-plot"), [{ x, y, color: "#111", line: true, dots: true }], "q", "log₁₀ δ_q", qStar);
  });
}

await init();
document.getElementById("intro-run").onclick = runIntro;
document.getElementById("nil-run").onclick = runNilpotent;
document.getElementById("turn-run").onclick = runTurnover;
await runIntro();
await runNilpotent();
await runTurnover();
