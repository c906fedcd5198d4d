import init, { spectrum, compare, sweepFamily, discGrid, catalogNames } from "./pkg/bsdkit_demo.js";

const $ = (id) => document.getElementById(id);

function show(el, f) {
  el.classList.remove("error");
  try {
    el.textContent = f();
  } catch (e) {
    el.classList.add("error");
    el.textContent = String(e.message ?? e);
  }
}

function pretty(json) {
  return JSON.stringify(JSON.parse(json), null, 2);
}

function drawSweep() {
  const info = $("sweep-info");
  const canvas = $("sweep-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let data;
  try {
    data = JSON.parse(sweepFamily($("family").value, +$("lo").value, +$("hi").value, +$("step").value));
  } catch (e) {
    info.classList.add("error");
    info.textContent = String(e.message ?? e);
    return;
  }
  info.classList.remove("error");
  const m = data.distances;
  const n = m.length;
  let max = 0;
  let min = Infinity;
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      max = Math.max(max, m[i][j]);
      if (i !== j) min = Math.min(min, m[i][j]);
    }
  }
  const cell = canvas.width / n;
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const v = max > 0 ? m[i][j] / max : 0;
      const shade = Math.round(255 * (1 - v));
      ctx.fillStyle = `rgb(${shade}, ${shade}, 255)`;
      ctx.fillRect(j * cell, i * cell, cell, cell);
    }
  }
  info.textContent = n > 1
    ? `${n} parameters, largest distance ${max.toFixed(4)}, smallest off-diagonal ${min.toFixed(4)}`
    : "single parameter";
}

let centre = [0, 0];

function drawDisc() {
  const canvas = $("disc-canvas");
  const ctx = canvas.getContext("2d");
  const rings = Math.max(1, +$("rings").value | 0);
  const spokes = Math.max(1, +$("spokes").value | 0);
  const samples = 96;
  const half = canvas.width / 2;
  const scale = half - 10;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#000";
  ctx.beginPath();
  ctx.arc(half, half, scale, 0, 2 * Math.PI);
  ctx.stroke();
  let pts;
  try {
    pts = discGrid(centre[0], centre[1], rings, spokes, samples);
  } catch (e) {
    $("disc-info").textContent = String(e.message ?? e);
    return;
  }
  for (let line = 0; line < rings + spokes; line++) {
    ctx.strokeStyle = line < rings ? "#36c" : "#c63";
    ctx.beginPath();
    for (let k = 0; k < samples; k++) {
      const idx = 2 * (line * samples + k);
      const x = half + scale * pts[idx];
      const y = half - scale * pts[idx + 1];
      if (k === 0) ctx.moveTo(x, y); else ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
  $("disc-info").textContent = `origin sent to ${centre[0].toFixed(3)} ${centre[1] < 0 ? "-" : "+"} ${Math.abs(centre[1]).toFixed(3)}i`;
}

await init();

for (const name of catalogNames()) {
  const opt = document.createElement("option");
  opt.value = name;
  $("names").appendChild(opt);
}

$("run-spectrum").onclick = () => show($("spectrum-out"), () => pretty(spectrum($("map-a").value)));
$("run-compare").onclick = () => show($("spectrum-out"), () => pretty(compare($("map-a").value, $("map-b").value)));
$("run-sweep").onclick = drawSweep;
$("rings").onchange = drawDisc;
$("spokes").onchange = drawDisc;
$("disc-canvas").onclick = (ev) => {
  const canvas = ev.currentTarget;
  const rect = canvas.getBoundingClientRect();
  const half = canvas.width / 2;
  const scale = half - 10;
  const x = ((ev.clientX - rect.left) * canvas.width / rect.width - half) / scale;
  const y = -((ev.clientY - rect.top) * canvas.height / rect.height - half) / scale;
  if (x * x + y * y < 0.98) {
    centre = [x, y];
    drawDisc();
  }
};

drawSweep();
drawDisc();
