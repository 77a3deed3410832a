import init, { grfSample, adrSolve, qLowerCurve } from "./pkg/deeponet_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function linePlot(canvas, xs, ys) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const xmin = Math.min(...xs), xmax = Math.max(...xs);
  let ymin = Math.min(...ys), ymax = Math.max(...ys);
  if (ymax === ymin) { ymax += 1; ymin -= 1; }
  const px = (x) => 40 + (w - 50) * (x - xmin) / (xmax - xmin);
  const py = (y) => h - 20 - (h - 30) * (y - ymin) / (ymax - ymin);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(40, 10, w - 50, h - 30);
  ctx.fillStyle = "#444";
  ctx.fillText(ymax.toPrecision(3), 2, 14);
  ctx.fillText(ymin.toPrecision(3), 2, h - 20);
  ctx.strokeStyle = "#1565c0";
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(ys[i])) : ctx.moveTo(px(x), py(ys[i]))));
  ctx.stroke();
}

function guarded(msgId, action) {
  return () => {
    $(msgId).textContent = "";
    try {
      action();
    } catch (e) {
      $(msgId).textContent = String(e.message ?? e);
    }
  };
}

function drawGrf() {
  const n = num("grf-n");
  const f = grfSample(num("grf-l"), n, num("grf-seed"));
  linePlot($("grf-plot"), Array.from(f, (_, i) => i / (n - 1)), Array.from(f));
}

function drawAdr() {
  const field = adrSolve(num("adr-l"), num("adr-d"), num("adr-k"), num("adr-n"), num("adr-seed"));
  const nx = field.nx(), nt = field.nt(), u = field.values();
  field.free();
  const peak = Math.max(...u.map(Math.abs)) || 1;
  const canvas = $("adr-plot");
  const ctx = canvas.getContext("2d");
  const image = ctx.createImageData(nt, nx);
  for (let i = 0; i < nx; i++) {
    for (let j = 0; j < nt; j++) {
      const v = u[i * nt + j] / peak;
      const k = 4 * (i * nt + j);
      image.data[k] = v > 0 ? 255 : 255 * (1 + v);
      image.data[k + 1] = 255 * (1 - Math.abs(v));
      image.data[k + 2] = v < 0 ? 255 : 255 * (1 - v);
      image.data[k + 3] = 255;
    }
  }
  const tmp = document.createElement("canvas");
  tmp.width = nt;
  tmp.height = nx;
  tmp.getContext("2d").putImageData(image, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

function drawBound() {
  const logs = Array.from({ length: 121 }, (_, i) => 2 + i / 10);
  const q = qLowerCurve($("bound-json").value, $("bound-sigmoid").checked, logs.map((l) => 10 ** l));
  linePlot($("bound-plot"), logs, Array.from(q));
}

await init();
$("grf-go").onclick = guarded("grf-msg", drawGrf);
$("adr-go").onclick = guarded("adr-msg", drawAdr);
$("bound-go").onclick = guarded("bound-msg", drawBound);
guarded("grf-msg", drawGrf)();
guarded("adr-msg", drawAdr)();
guarded("bound-msg", drawBound)();
