import init, { proxy_slice, properties, round_robin } from "./pkg/dtest_web.js";

const PRESETS = {
  sphere: ["csg", '{"sphere": {"center": [0, 0, 0], "radius": 1}}'],
  bracket: ["csg", JSON.stringify({
    difference: [
      { box: { min: [-1, -0.5, -0.25], max: [1, 0.5, 0.25] } },
      { cylinder: { base: [0, 0, -1], axis: [0, 0, 1], radius: 0.3, height: 2 } },
    ],
  }, null, 1)],
  octahedron: ["off", "OFF\n6 8 0\n1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 0 -1\n" +
    "3 0 2 4\n3 2 1 4\n3 1 3 4\n3 3 0 4\n3 2 0 5\n3 1 2 5\n3 3 1 5\n3 0 3 5\n"],
};

const $ = (id) => document.getElementById(id);
const COLORS = { "#": "#3a6ea5", "+": "#e0a030", ".": "#f4f4f4" };

function model() {
  return [$("model").value, $("format").value, Number($("epsilon").value)];
}

function guard(f) {
  try {
    $("status").textContent = "";
    f();
  } catch (e) {
    $("status").textContent = String(e);
  }
}

function drawSlice() {
  guard(() => {
    const [text, format, eps] = model();
    const s = JSON.parse(proxy_slice(text, format, eps, Number($("height").value)));
    const canvas = $("slice");
    const cell = Math.max(1, Math.floor(320 / Math.max(s.nx, s.ny)));
    canvas.width = s.nx * cell;
    canvas.height = s.ny * cell;
    const ctx = canvas.getContext("2d");
    s.rows.forEach((row, j) => {
      [...row].forEach((c, i) => {
        ctx.fillStyle = COLORS[c];
        ctx.fillRect(i * cell, j * cell, cell, cell);
      });
    });
    $("slice-info").textContent = `z = ${s.z.toFixed(4)}, ${s.nx} x ${s.ny} points, spacing ${s.spacing.toFixed(4)}`;
  });
}

function fill(table, head, rows) {
  table.innerHTML = "";
  const tr = table.insertRow();
  head.forEach((h) => { const th = document.createElement("th"); th.textContent = h; tr.appendChild(th); });
  rows.forEach((r) => { const row = table.insertRow(); r.forEach((c) => { row.insertCell().textContent = c; }); });
}

function measureModel() {
  guard(() => {
    const [text, format, eps] = model();
    const out = JSON.parse(properties(text, format, eps, $("kinds").value, Number($("rays").value)));
    fill($("props"), ["property", "value", "error"], out.map((p) => [p.name, p.value, p.error.toExponential(2)]));
  });
}

function runRoundRobin() {
  guard(() => {
    const [text, format] = model();
    const t = JSON.parse(round_robin(text, format, Number($("qa").value), Number($("qb").value),
      Number($("weld").value), Number($("rounds").value), $("rr-kinds").value));
    const rows = t.rounds.map((r) => [r.round === 0 ? "Model" : `M_i_${r.round}`, r.profile ?? "", r.digest,
      `${r.vertices}/${r.triangles}`, ...r.values]);
    rows.push(["Stabilized in", "", "", "", ...t.stabilized]);
    fill($("trace"), ["round", "profile", "digest", "V/T", ...t.kinds], rows);
  });
}

function loadPreset() {
  const [format, text] = PRESETS[$("preset").value];
  $("format").value = format;
  $("model").value = text;
  drawSlice();
}

await init();
$("preset").addEventListener("change", loadPreset);
$("height").addEventListener("input", drawSlice);
$("epsilon").addEventListener("change", drawSlice);
$("model").addEventListener("change", drawSlice);
$("measure").addEventListener("click", measureModel);
$("rr").addEventListener("click", runRoundRobin);
loadPreset();
