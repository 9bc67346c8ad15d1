import init, { Demo } from "./pkg/chassis_ris_web.js";

const $ = (id) => document.getElementById(id);
let demo = null;
let mask = 0;

function plot(canvas, xs, ys, opts = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = { l: 56, r: 12, t: 18, b: 30 };
  ctx.clearRect(0, 0, w, h);
  const finite = ys.filter(Number.isFinite);
  let y0 = opts.yMin ?? Math.min(...finite);
  let y1 = Math.max(...finite);
  if (y1 <= y0) y1 = y0 + 1;
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const sx = (x) => pad.l + ((x - x0) / (x1 - x0)) * (w - pad.l - pad.r);
  const sy = (y) => pad.t + (1 - (Math.max(y, y0) - y0) / (y1 - y0)) * (h - pad.t - pad.b);

  if (opts.band) {
    ctx.fillStyle = "#fdd";
    ctx.fillRect(sx(opts.band[0]), pad.t, sx(opts.band[1]) - sx(opts.band[0]), h - pad.t - pad.b);
  }
  ctx.strokeStyle = "#000";
  ctx.strokeRect(pad.l, pad.t, w - pad.l - pad.r, h - pad.t - pad.b);
  ctx.fillStyle = "#000";
  ctx.font = "12px sans-serif";
  ctx.fillText(opts.title ?? "", pad.l, 13);
  ctx.textAlign = "center";
  for (let k = 0; k <= 4; k++) {
    const x = x0 + ((x1 - x0) * k) / 4;
    ctx.fillText(x.toFixed(2), sx(x), h - 12);
  }
  ctx.textAlign = "right";
  for (let k = 0; k <= 4; k++) {
    const y = y0 + ((y1 - y0) * k) / 4;
    ctx.fillText(Math.abs(y1 - y0) < 0.1 ? y.toExponential(1) : y.toFixed(1), pad.l - 4, sy(y) + 4);
  }
  ctx.textAlign = "left";

  ctx.strokeStyle = opts.color ?? "#1f77b4";
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(ys[i])) : ctx.moveTo(sx(x), sy(ys[i]))));
  ctx.stroke();
  if (opts.marker !== undefined) {
    ctx.strokeStyle = "#d62728";
    ctx.beginPath();
    ctx.moveTo(sx(opts.marker), pad.t);
    ctx.lineTo(sx(opts.marker), h - pad.b);
    ctx.stroke();
  }
}

function guarded(fn) {
  return (...args) => {
    $("status").textContent = "";
    try {
      fn(...args);
    } catch (e) {
      $("status").textContent = String(e);
    }
  };
}

function renderElements() {
  const n = demo.elements();
  const box = $("elements");
  box.replaceChildren();
  for (let i = 0; i < n; i++) {
    const label = document.createElement("label");
    const cb = document.createElement("input");
    cb.type = "checkbox";
    cb.checked = ((mask >> i) & 1) === 1;
    cb.addEventListener("change", guarded(() => {
      mask ^= 1 << i;
      mask >>>= 0;
      refresh();
    }));
    label.append(cb, String(i));
    box.append(label);
  }
}

function refresh() {
  const a = demo.analyze(mask);
  $("mask-index").textContent = mask;
  $("fom").textContent = a.fom.toFixed(4);
  $("spread").textContent = a.delay_spread_ns.toFixed(2);
  $("peak").textContent = a.peak_ns.toFixed(2);
  const f = Array.from(demo.frequencies_ghz());
  plot($("spectrum"), f, Array.from(a.spectrum_db), { title: "|H|^2 (dB) vs frequency (GHz)" });
  const cir = Array.from(a.cir_db);
  const t = cir.map((_, k) => k * a.t_step_ns);
  const top = Math.max(...cir);
  plot($("cir"), t, cir, { title: "|h|^2 (dB) vs delay (ns)", yMin: top - 60, color: "#2ca02c", marker: a.peak_ns });
  a.free();
}

function setMask(m) {
  mask = m >>> 0;
  renderElements();
  refresh();
}

function rebuild() {
  if (demo) demo.free();
  demo = new Demo(Number($("n").value), Number($("seed").value), Number($("points").value));
  setMask(0);
  $("band").textContent = "";
  $("std").getContext("2d").clearRect(0, 0, 940, 220);
}

function survey() {
  const s = demo.survey(Number($("survey-count").value), 1);
  const f = Array.from(demo.frequencies_ghz());
  const band = [s.band_start_ghz, s.band_stop_ghz];
  plot($("std"), f, Array.from(s.std), { title: "std of |H| across masks vs frequency (GHz)", yMin: 0, color: "#9467bd", band });
  $("band").textContent = `selected band ${band[0].toFixed(3)} to ${band[1].toFixed(3)} GHz`;
  s.free();
}

// Long runs block the page; let the status line paint first.
function busy(label, fn) {
  return guarded(() => {
    $("status").textContent = label;
    setTimeout(guarded(fn), 20);
  });
}

await init();
$("rebuild").addEventListener("click", guarded(rebuild));
$("all-off").addEventListener("click", guarded(() => setMask(0)));
$("all-on").addEventListener("click", guarded(() => setMask(2 ** demo.elements() - 1)));
$("optimize").addEventListener("click", busy("searching...", () => setMask(demo.optimize(4, Date.now() % 1000))));
$("survey").addEventListener("click", busy("surveying...", survey));
guarded(rebuild)();
