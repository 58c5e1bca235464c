import init, { Demo } from "./pkg/msdhmm_web.js";

const $ = (id) => document.getElementById(id);
let demo, info, names, animation;

function fill(select, classes) {
  select.innerHTML = classes.map((c) => `<option value="${c.id}">${c.id}: ${c.name}</option>`).join("");
}

function drawFigure(frames, bones) {
  const canvas = $("figure");
  const ctx = canvas.getContext("2d");
  let lo = [Infinity, Infinity], hi = [-Infinity, -Infinity];
  for (const f of frames) for (const [x, y] of f) {
    lo = [Math.min(lo[0], x), Math.min(lo[1], y)];
    hi = [Math.max(hi[0], x), Math.max(hi[1], y)];
  }
  const scale = 0.85 * Math.min(canvas.width / (hi[0] - lo[0]), canvas.height / (hi[1] - lo[1]));
  const px = ([x, y]) => [
    canvas.width / 2 + (x - (lo[0] + hi[0]) / 2) * scale,
    canvas.height / 2 - (y - (lo[1] + hi[1]) / 2) * scale,
  ];
  cancelAnimationFrame(animation);
  let t = 0, last = 0;
  const step = (now) => {
    if (now - last > 33) {
      last = now;
      const f = frames[t % frames.length];
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      ctx.strokeStyle = "#345";
      ctx.lineWidth = 3;
      for (const [a, b] of bones) {
        const [x0, y0] = px(f[a]), [x1, y1] = px(f[b]);
        ctx.beginPath(); ctx.moveTo(x0, y0); ctx.lineTo(x1, y1); ctx.stroke();
      }
      ctx.fillStyle = "#888";
      ctx.fillText(`frame ${t % frames.length + 1}/${frames.length}`, 8, 16);
      t++;
    }
    animation = requestAnimationFrame(step);
  };
  animation = requestAnimationFrame(step);
}

function showScores(r) {
  const best = Math.max(...r.stage2_scores.map((s) => s.loglik));
  const rows = r.stage2_scores.map((s) =>
    `<tr class="${s.loglik === best ? "best" : ""}"><td>${s.class}: ${names[s.class]}</td><td>${s.loglik.toFixed(1)}</td></tr>`);
  $("scores").innerHTML = `<tr><th>stage-2 model (${r.group})</th><th>log-likelihood</th></tr>` + rows.join("");
  const ok = r.class === r.label ? "correct" : "wrong";
  $("verdict").textContent =
    `Stage 1 picked ${names[r.stage1_class]} (group ${r.group}); stage 2 answers ${names[r.class]}: ${ok}.`;
}

function sample() {
  const r = JSON.parse(demo.sample(Number($("gesture").value)));
  drawFigure(r.frames, info.bones);
  showScores(r);
  $("trellis-class").value = String(r.class);
  $("trellis").disabled = false;
  trellis();
}

function trellis() {
  const r = JSON.parse(demo.trellis(Number($("trellis-class").value)));
  const canvas = $("heatmap");
  const ctx = canvas.getContext("2d");
  const T = r.posteriors.length, N = r.states;
  const w = canvas.width / T, h = canvas.height / N;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  r.posteriors.forEach((row, t) => row.forEach((p, j) => {
    const shade = Math.round(255 * (1 - p));
    ctx.fillStyle = `rgb(${shade},${shade},255)`;
    ctx.fillRect(t * w, j * h, Math.ceil(w), Math.ceil(h));
  }));
  $("trellis-info").textContent = `${N} states x ${T} frames, log-likelihood ${r.loglik.toFixed(1)} (state 1 on top)`;
}

function segment() {
  const r = JSON.parse(demo.segment(
    Number($("count").value), Number($("gap").value), Number($("th").value), Number($("vote").value)));
  const canvas = $("timeline");
  const ctx = canvas.getContext("2d");
  const x = (t) => (t / r.frames) * canvas.width;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  r.trace.forEach(([, open], t) => {
    if (open) { ctx.fillStyle = "#f4d35e55"; ctx.fillRect(x(t), 0, Math.ceil(x(1)), 150); }
  });
  ctx.strokeStyle = "#333";
  ctx.beginPath();
  r.trace.forEach(([v], t) => (t ? ctx.lineTo(x(t), 150 - v * 140) : ctx.moveTo(0, 150 - v * 140)));
  ctx.stroke();
  ctx.font = "11px sans-serif";
  for (const s of r.truth) {
    ctx.fillStyle = "#9bbbe0"; ctx.fillRect(x(s.start), 160, x(s.end) - x(s.start), 22);
    ctx.fillStyle = "#123"; ctx.fillText(String(s.class), x(s.start) + 2, 175);
  }
  let correct = 0;
  for (const e of r.events) {
    ctx.fillStyle = e.kind === "end" ? "#4caf50" : "#e57373";
    ctx.fillRect(x(e.start), 190, x(e.end) - x(e.start), 22);
    if (e.kind === "end") {
      ctx.fillStyle = "#fff"; ctx.fillText(String(e.class), x(e.start) + 2, 205);
      const hit = r.truth.find((s) => Math.min(s.end, e.end) > Math.max(s.start, e.start));
      if (hit && hit.class === e.class) correct++;
    }
  }
  const ends = r.events.filter((e) => e.kind === "end").length;
  $("segment-info").textContent =
    `${r.frames} frames, ${r.truth.length} gestures, ${ends} accepted (${correct} overlapping a gesture of the same class), ` +
    `${r.events.length - ends} rejected.`;
}

async function main() {
  await init();
  const t0 = performance.now();
  demo = new Demo(7);
  info = JSON.parse(demo.info());
  names = Object.fromEntries(info.classes.map((c) => [c.id, c.name]));
  fill($("gesture"), info.classes);
  fill($("trellis-class"), info.classes);
  $("status").textContent = `Model trained in ${((performance.now() - t0) / 1000).toFixed(2)} s on synthetic skeletons.`;
  $("sample").disabled = false;
  $("segment").disabled = false;
  $("sample").onclick = sample;
  $("trellis").onclick = trellis;
  $("segment").onclick = segment;
  sample();
  segment();
}

main().catch((e) => { $("status").textContent = `Failed: ${e}`; });
