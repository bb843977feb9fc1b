import init, { reconstruct, solveDirect, checkConditions } from "./pkg/pseudoparabolic_web.js";

const $ = (id) => document.getElementById(id);

function plot(canvas, x, series) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 46;
  ctx.clearRect(0, 0, w, h);
  const finite = series.flatMap((s) => Array.from(s.y)).filter(Number.isFinite);
  if (x.length === 0 || finite.length === 0) return;
  let lo = Math.min(...finite), hi = Math.max(...finite);
  if (hi === lo) { lo -= 1; hi += 1; }
  const x0 = x[0], x1 = x[x.length - 1] === x0 ? x0 + 1 : x[x.length - 1];
  const px = (v) => pad + ((v - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (v) => h - pad + ((lo - v) / (hi - lo)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.font = "12px system-ui";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  for (const [v, label] of [[lo, lo], [hi, hi]]) ctx.fillText(label.toPrecision(3), 2, py(v) + 4);
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 16);
  ctx.fillText(x1.toPrecision(3), w - pad - 20, h - pad + 16);
  if (lo < 0 && hi > 0) {
    ctx.beginPath();
    ctx.moveTo(pad, py(0));
    ctx.lineTo(w - pad, py(0));
    ctx.stroke();
  }
  for (const s of series) {
    if (s.y.length !== x.length) continue;
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width || 1.5;
    ctx.beginPath();
    let pen = false;
    for (let i = 0; i < x.length; i++) {
      if (!Number.isFinite(s.y[i])) { pen = false; continue; }
      pen ? ctx.lineTo(px(x[i]), py(s.y[i])) : ctx.moveTo(px(x[i]), py(s.y[i]));
      pen = true;
    }
    ctx.stroke();
  }
}

function settings() {
  return { c: $("case").value, scheme: $("scheme").value, n: Number($("n").value) };
}

function show(name, compute) {
  const out = $("sum-" + name);
  out.classList.remove("error");
  try {
    const r = compute();
    const series = [{ y: r.numeric, color: "#c33", width: 2 }];
    if (r.exact.length) series.push({ y: r.exact, color: "#36c" });
    plot($("plot-" + name), r.x, series);
    out.textContent = r.summary;
  } catch (e) {
    out.classList.add("error");
    out.textContent = String(e.message || e);
  }
}

await init();

const runInverse = () => {
  const { c, scheme, n } = settings();
  show("inverse", () => reconstruct(c, scheme, n, Number($("noise").value), Number($("seed").value) >>> 0));
};
const runDirect = () => {
  const { c, scheme, n } = settings();
  show("direct", () => solveDirect(c, scheme, n));
};
const runCheck = () => {
  const { c, n } = settings();
  show("check", () => checkConditions(c, n));
};

$("run-inverse").onclick = runInverse;
$("run-direct").onclick = runDirect;
$("run-check").onclick = runCheck;
for (const id of ["case", "scheme", "n"]) $(id).onchange = () => { runInverse(); runDirect(); runCheck(); };
runInverse();
runDirect();
runCheck();
