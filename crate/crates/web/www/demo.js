import init, { worst_case, alpha_heatmap, compare } from "./pkg/bicluster_web.js";

const $ = (id) => document.getElementById(id);

function call(fn, ...args) {
  const v = JSON.parse(fn(...args));
  if (v.error) throw new Error(v.error);
  return v;
}

function showError(el, e) {
  el.innerHTML = "";
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = e.message;
  el.appendChild(p);
}

function table(el, rows) {
  el.innerHTML = "";
  const t = document.createElement("table");
  for (const [k, v] of rows) {
    const tr = t.insertRow();
    tr.insertCell().textContent = k;
    tr.insertCell().textContent = v;
  }
  el.appendChild(t);
}

const sets = (clusters) => clusters.map((c) => `{${c.join(",")}}`).join(" ");
const fmt = (x) => (typeof x === "number" ? +x.toFixed(6) : String(x));

const ROW_COLORS = ["#4878d0", "#ee854a"];

function drawWorstCase() {
  const q = +$("wc-q").value;
  $("wc-q-out").textContent = q;
  const out = $("wc-out");
  try {
    const v = call(worst_case, q);
    const cv = $("wc-canvas");
    const ctx = cv.getContext("2d");
    const m = v.matrix[0].length;
    const cell = Math.max(1, Math.min(24, Math.floor((cv.width - 40) / m)));
    const h = 24;
    ctx.clearRect(0, 0, cv.width, cv.height);
    // Left bars: scheme row clusters; right bars: optimal row clusters.
    const label = (clusters, row) => clusters.findIndex((c) => c.includes(row + 1));
    v.matrix.forEach((row, i) => {
      ctx.fillStyle = ROW_COLORS[label(v.scheme_rows, i)];
      ctx.fillRect(0, 10 + i * h, 12, h - 2);
      ctx.fillStyle = ROW_COLORS[label(v.optimal_rows, i)];
      ctx.fillRect(20 + m * cell + 4, 10 + i * h, 12, h - 2);
      row.forEach((x, j) => {
        ctx.fillStyle = x ? "#222" : "#eee";
        ctx.fillRect(18 + j * cell, 10 + i * h, Math.max(1, cell - 1), h - 2);
      });
    });
    table(out, [
      ["matrix", `4 x ${m}`],
      ["scheme rows (left bar)", sets(v.scheme_rows)],
      ["optimal rows (right bar)", sets(v.optimal_rows)],
      ["L", v.l],
      ["L*", v.l_star],
      ["L / L*", fmt(v.ratio)],
      ["limit as q grows", v.limit],
    ]);
  } catch (e) {
    showError(out, e);
  }
}

function color(t) {
  // Dark blue at 0 to yellow at 1.
  const r = Math.round(255 * Math.min(1, 2 * t));
  const g = Math.round(200 * t + 30);
  const b = Math.round(160 * (1 - t) + 40);
  return `rgb(${r},${g},${b})`;
}

function drawHeatmap() {
  const out = $("hm-out");
  try {
    const v = call(alpha_heatmap, $("hm-case").value, +$("hm-cells").value, +$("hm-steps").value);
    const cv = $("hm-canvas");
    const ctx = cv.getContext("2d");
    const n = v.cells;
    const s = cv.width / n;
    ctx.clearRect(0, 0, cv.width, cv.height);
    v.values.forEach((row, j) =>
      row.forEach((val, i) => {
        // y grows upwards.
        ctx.fillStyle = val === null ? "#fff" : color(val / v.supremum);
        ctx.fillRect(i * s, cv.height - (j + 1) * s, Math.ceil(s), Math.ceil(s));
      }),
    );
    ctx.strokeStyle = "#d00";
    for (const p of v.optima) {
      ctx.beginPath();
      ctx.arc(p.x * cv.width, cv.height - p.y * cv.height, 6, 0, 2 * Math.PI);
      ctx.stroke();
    }
    const rows = [
      ["best sampled value", v.max ? fmt(v.max.value) : "none"],
      ["at (x, y)", v.max ? `(${fmt(v.max.x)}, ${fmt(v.max.y)})` : ""],
      ["1 + sqrt 2", fmt(v.supremum)],
    ];
    for (const p of v.optima) rows.push(["closed-form optimum (red circle)", `${fmt(p.value)} at (${fmt(p.x)}, ${fmt(p.y)})`]);
    table(out, rows);
  } catch (e) {
    showError(out, e);
  }
}

function runCompare() {
  const out = $("cmp-out");
  try {
    const v = call(compare, $("cmp-input").value, +$("cmp-kr").value, +$("cmp-kc").value, $("cmp-norm").value);
    table(out, [
      ["matrix", `${v.n_rows} x ${v.n_cols}${v.binary ? ", binary" : ""}`],
      ["scheme rows / cols", `${sets(v.scheme.rows)} / ${sets(v.scheme.cols)}`],
      ["optimal rows / cols", `${sets(v.optimal.rows)} / ${sets(v.optimal.cols)}`],
      ["L_R, L_C", `${fmt(v.l_r)}, ${fmt(v.l_c)}`],
      ["L (scheme)", fmt(v.l)],
      ["L* (optimum)", fmt(v.l_star)],
      ["L / L*", fmt(v.ratio)],
      ["guaranteed bound", v.alpha_bound === null ? "none for L1 on real data" : fmt(v.alpha_bound)],
      ["within bound", v.certified === null ? "n/a" : v.certified],
    ]);
  } catch (e) {
    showError(out, e);
  }
}

await init();
$("wc-q").addEventListener("input", drawWorstCase);
for (const id of ["hm-case", "hm-cells", "hm-steps"]) $(id).addEventListener("change", drawHeatmap);
$("cmp-run").addEventListener("click", runCompare);
drawWorstCase();
drawHeatmap();
runCompare();
