import init, { decay_curve, homogeneous_limits, eigenfunction } from "./pkg/pam_wasm_demo.js";

const num = (id) => Number(document.getElementById(id).value);
const out = (id, text) => { document.getElementById(id).textContent = text; };

// polylines on a shared linear or log x axis
function plot(canvas, series, { logx = false } = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 30;
  ctx.clearRect(0, 0, w, h);
  const fx = logx ? Math.log10 : (x) => x;
  const xs = series.flatMap((s) => s.x.map(fx));
  const ys = series.flatMap((s) => s.y).filter(Number.isFinite);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(0, ...ys), Math.max(...ys)];
  const px = (x) => pad + ((fx(x) - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.fillText(y1.toPrecision(3), 2, pad);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.x.forEach((x, i) => {
      if (!Number.isFinite(s.y[i])) return;
      i === 0 ? ctx.moveTo(px(x), py(s.y[i])) : ctx.lineTo(px(x), py(s.y[i]));
    });
    ctx.stroke();
  }
}

function heatmap(canvas, values, side) {
  const ctx = canvas.getContext("2d");
  const cell = canvas.width / side;
  const max = Math.max(...values);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  values.forEach((v, k) => {
    const shade = Math.round(255 * (1 - Math.sqrt(v / max)));
    ctx.fillStyle = `rgb(255, ${shade}, ${shade})`;
    ctx.fillRect((k % side) * cell, Math.floor(k / side) * cell, cell + 0.5, cell + 0.5);
  });
}

function guard(id, f) {
  try { f(); } catch (e) { out(id, `error: ${e.message ?? e}`); }
}

function runDecay() {
  guard("dc-out", () => {
    const flat = decay_curve(num("dc-kappa"), num("dc-rho"), num("dc-gamma"), num("dc-tmax"), 60);
    const t = [], m = [], a = [];
    for (let k = 0; k < flat.length; k += 3) { t.push(flat[k]); m.push(flat[k + 1]); a.push(flat[k + 2]); }
    plot(document.getElementById("dc-plot"), [
      { x: t, y: m, color: "#c22" },
      { x: t, y: a.map((v) => Math.min(v, 1.2)), color: "#22c" },
    ]);
    const n = t.length - 1;
    out("dc-out", `red: M_0(t), blue: asymptote\nat t = ${t[n]}: M = ${m[n].toPrecision(6)}, ratio ${(m[n] / a[n]).toFixed(4)}`);
  });
}

function runHomog() {
  guard("hl-out", () => {
    const lo = Math.log10(num("hl-lo")), hi = Math.log10(num("hl-hi"));
    const a = Array.from({ length: 41 }, (_, k) => 10 ** (lo + ((hi - lo) * k) / 40));
    const v = Array.from(homogeneous_limits(Float64Array.from(a)));
    plot(document.getElementById("hl-plot"), [{ x: a, y: v, color: "#2a2" }], { logx: true });
    out("hl-out", `limit at a = ${a[0].toPrecision(3)}: ${v[0].toFixed(5)}; at a = ${a[40].toPrecision(3)}: ${v[40].toFixed(5)}`);
  });
}

function runEigen() {
  guard("ef-out", () => {
    const p = num("ef-p"), radius = num("ef-radius");
    const flat = eigenfunction(num("ef-kappa"), num("ef-rho"), num("ef-gamma"), p, radius);
    const lambda = flat[0], v = Array.from(flat.slice(1));
    const side = 2 * radius + 1;
    const canvas = document.getElementById("ef-plot");
    if (p === 1) {
      plot(canvas, [{ x: v.map((_, k) => k - radius), y: v, color: "#c60" }]);
    } else {
      heatmap(canvas, v, side);
    }
    out("ef-out", `lambda_${p} = ${lambda.toPrecision(10)}`);
  });
}

await init();
document.getElementById("dc-run").onclick = runDecay;
document.getElementById("hl-run").onclick = runHomog;
document.getElementById("ef-run").onclick = runEigen;
runDecay();
runHomog();
runEigen();
