// Built with: wasm-pack build crates/web --target web --out-dir www/pkg
import init, { classify, ratio_curve, ambiguity_modulus } from "./pkg/metaplectic_web.js";

const $ = (id) => document.getElementById(id);

function exponent(text) {
  const t = text.trim();
  return t === "inf" ? "inf" : Number(t);
}

function request(extra) {
  return JSON.stringify({
    matrix: JSON.parse($("matrix").value),
    p: exponent($("p").value),
    q: exponent($("q").value),
    ...extra,
  });
}

function guarded(out, f) {
  try {
    f();
  } catch (e) {
    out.textContent = "error: " + (e.message ?? e);
  }
}

function plotCurve(canvas, rows) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pts = rows.map((r) => [Math.log(r.eps), r.log_ratio]).filter(([, y]) => Number.isFinite(y));
  if (pts.length < 2) return;
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-9) { y0 -= 1; y1 += 1; }
  const pad = 30;
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (canvas.width - 2 * pad);
  const sy = (y) => canvas.height - pad - ((y - y0) / (y1 - y0)) * (canvas.height - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, canvas.width - 2 * pad, canvas.height - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.fillText("log eps", canvas.width / 2, canvas.height - 8);
  ctx.fillText("log ratio", 2, pad - 8);
  ctx.strokeStyle = "#1565c0";
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
  ctx.stroke();
}

function plotField(canvas, n, values) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(n, n);
  const top = Math.max(...values);
  values.forEach((v, i) => {
    const shade = Math.round(255 * (1 - Math.sqrt(v / top)));
    img.data.set([shade, shade, 255, 255], 4 * i);
  });
  const tmp = new OffscreenCanvas(n, n);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

await init();

$("classify").onclick = () =>
  guarded($("verdict"), () => {
    $("verdict").textContent = JSON.stringify(JSON.parse(classify(request({}))), null, 2);
  });

$("curve").onclick = () =>
  guarded($("curve-summary"), () => {
    const report = JSON.parse(
      ratio_curve(
        request({
          eps: { min: Number($("eps-min").value), max: Number($("eps-max").value), count: Number($("eps-count").value) },
        }),
      ),
    );
    plotCurve($("curve-plot"), report.rows);
    const { rows, ...summary } = report;
    $("curve-summary").textContent = JSON.stringify(summary, null, 2);
  });

$("ambiguity").onclick = () =>
  guarded($("amb-summary"), () => {
    const out = JSON.parse(
      ambiguity_modulus(
        JSON.stringify({ eps: Number($("amb-eps").value), n: Number($("amb-n").value), T: Number($("amb-t").value) }),
      ),
    );
    plotField($("amb-plot"), out.n, out.values);
    $("amb-summary").textContent = `peak ${Math.max(...out.values).toFixed(6)} on a ${out.n} x ${out.n} grid`;
  });
