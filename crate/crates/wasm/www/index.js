import init, { entropy_curves, residual_curves, classify_functional } from "./pkg/qentropy_wasm.js";

const COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"];
const $ = (id) => document.getElementById(id);

function show(text, isError = false) {
  $("out").textContent = text;
  $("out").className = isError ? "error" : "";
}

function plot(q, series, transform) {
  const canvas = $("plot");
  const ctx = canvas.getContext("2d");
  const pad = 40;
  const w = canvas.width - 2 * pad;
  const h = canvas.height - 2 * pad;
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  const ys = series.map((s) => s.values.map((v) => (v === null ? null : transform(v))));
  const finite = ys.flat().filter((v) => v !== null && Number.isFinite(v));
  if (finite.length === 0) return;
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (hi === lo) { hi += 1; lo -= 1; }
  const x = (v) => pad + ((v - q[0]) / (q[q.length - 1] - q[0])) * w;
  const y = (v) => pad + h - ((v - lo) / (hi - lo)) * h;

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w, h);
  ctx.fillStyle = "#333";
  ctx.fillText(hi.toPrecision(3), 2, pad + 4);
  ctx.fillText(lo.toPrecision(3), 2, pad + h);
  ctx.fillText(q[0].toPrecision(3), pad, pad + h + 14);
  ctx.fillText(q[q.length - 1].toPrecision(3), pad + w - 20, pad + h + 14);

  $("legend").innerHTML = "";
  ys.forEach((vals, i) => {
    const color = COLORS[i % COLORS.length];
    ctx.strokeStyle = color;
    ctx.beginPath();
    let pen = false;
    vals.forEach((v, j) => {
      if (v === null || !Number.isFinite(v)) { pen = false; return; }
      if (pen) ctx.lineTo(x(q[j]), y(v)); else ctx.moveTo(x(q[j]), y(v));
      pen = true;
    });
    ctx.stroke();
    const tag = document.createElement("span");
    tag.style.color = color;
    tag.textContent = series[i].kind;
    $("legend").appendChild(tag);
  });
}

function run(action) {
  try { action(); } catch (e) { show(String(e), true); }
}

await init();

$("run-curves").onclick = () => run(() => {
  const out = JSON.parse(entropy_curves($("p").value, +$("qmin").value, +$("qmax").value, 200, $("phi").value));
  plot(out.q, out.series, (v) => v);
  show("entropy values against q");
});

$("run-residuals").onclick = () => run(() => {
  const out = JSON.parse(residual_curves($("a").value, $("b").value, +$("qmin").value, +$("qmax").value, 200, $("phi").value));
  const picked = out.series.filter((s) => s.identity === $("identity").value);
  // floor at 1e-17 so exact zeros stay on the plot
  plot(out.q, picked, (v) => Math.log10(Math.max(v, 1e-17)));
  show("log10 relative residual against q");
});

$("run-classify").onclick = () => run(() => {
  const out = JSON.parse(classify_functional($("kind").value, $("phi").value, +$("samples").value, BigInt($("seed").value)));
  show(JSON.stringify(out, null, 2));
});
