// Built with: wasm-pack build crates/web --target web --out-dir www/pkg
import init, { generate, visible_from, run_episode } from "./pkg/pomp_web.js";

const $ = (id) => document.getElementById(id);
const canvas = $("map");
const ctx = canvas.getContext("2d");
const log = $("log");

let scenario = null;
let visible = [];
let path = [];
let animation = null;

function cellSize() {
  return Math.floor(canvas.width / Math.max(scenario.width, scenario.height));
}

function fillCell(x, y, color, inset = 0) {
  const s = cellSize();
  ctx.fillStyle = color;
  ctx.fillRect(x * s + inset, y * s + inset, s - 2 * inset, s - 2 * inset);
}

function arrow(x, y, theta, color) {
  const s = cellSize();
  const a = (theta * 2 * Math.PI) / scenario.headings;
  const cx = x * s + s / 2, cy = y * s + s / 2;
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  // headings turn counter-clockwise from east; screen y grows downward
  ctx.lineTo(cx + Math.cos(a) * s * 0.45, cy - Math.sin(a) * s * 0.45);
  ctx.stroke();
}

function draw(pose) {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  scenario.rows.forEach((row, y) => {
    [...row].forEach((c, x) => {
      if (c === "#") fillCell(x, y, "#333");
      else if (c === "C") fillCell(x, y, "#c8a25a");
      else fillCell(x, y, "#fafafa");
    });
  });
  scenario.objects.forEach((cand, i) => {
    const [x, y] = scenario.candidates[cand];
    fillCell(x, y, i === scenario.target ? "#2b8a3e" : "#d9480f", 2);
  });
  for (const v of visible) fillCell(v.x, v.y, "rgba(77, 171, 247, 0.6)");
  for (const p of path) fillCell(p.x, p.y, "rgba(112, 72, 232, 0.25)", 3);
  if (pose) arrow(pose.x, pose.y, pose.theta, "#7048e8");
}

function showScenario(json) {
  scenario = JSON.parse(json);
  visible = [];
  path = [];
  $("start").innerHTML = scenario.starts
    .map((s, i) => `<option value="${i}">${s.name} (${s.x}, ${s.y}, ${s.theta})</option>`)
    .join("");
  draw();
  log.textContent = `${scenario.name}: ${scenario.width}x${scenario.height}, ${scenario.candidates.length} candidates`;
}

$("generate").onclick = () => {
  try {
    showScenario(generate($("difficulty").value, Number($("map-seed").value)));
  } catch (e) {
    log.textContent = `error: ${e}`;
  }
};

$("heading").oninput = () => ($("heading-label").textContent = $("heading").value);

canvas.onclick = (ev) => {
  if (!scenario) return;
  const s = cellSize();
  const rect = canvas.getBoundingClientRect();
  const x = Math.floor((ev.clientX - rect.left) / s);
  const y = Math.floor((ev.clientY - rect.top) / s);
  const theta = Number($("heading").value);
  try {
    visible = JSON.parse(visible_from(scenario.text, x, y, theta)).visible;
    path = [];
    draw({ x, y, theta });
    log.textContent = `(${x}, ${y}, ${theta}) sees ${visible.length} candidate cell(s)`;
  } catch (e) {
    log.textContent = `error: ${e}`;
  }
};

$("run").onclick = () => {
  if (!scenario) return;
  if (animation) clearInterval(animation);
  let result;
  try {
    result = JSON.parse(
      run_episode(scenario.text, $("policy").value, Number($("start").value), Number($("run-seed").value), Number($("sims").value)),
    );
  } catch (e) {
    log.textContent = `error: ${e}`;
    return;
  }
  visible = [];
  path = [result.start];
  let i = 0;
  const lines = [];
  animation = setInterval(() => {
    if (i >= result.steps.length) {
      clearInterval(animation);
      lines.push(
        `${result.success ? "success" : "failure (" + result.failure + ")"}: ` +
          `${result.path_length} moves, ${result.exploration_length} exploring, shortest ${result.shortest ?? "-"}`,
      );
      log.textContent = lines.join("\n");
      return;
    }
    const st = result.steps[i++];
    path.push(st);
    draw(st);
    if (st.detection) lines.push(`step ${i}: ${st.detection === "target" ? "target" : "false positive"} detected (${st.phase})`);
    log.textContent = lines.concat(`step ${i}/${result.steps.length} ${st.phase} ${st.action}`).join("\n");
  }, 60);
};

await init();
$("generate").click();
