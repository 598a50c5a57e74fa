import init, { TiltPad, ppg, run_scenario, demo_scenario } from "./pkg/paracom_web.js";

const $ = (id) => document.getElementById(id);
const IDLE = ["READY", ""];

function lcd(el, rows) {
  el.textContent = rows.map((r) => r.padEnd(16).slice(0, 16)).join("\n");
}

function tiltPanel() {
  const pad = new TiltPad();
  const canvas = $("tilt-canvas");
  const ctx = canvas.getContext("2d");
  const log = [];
  lcd($("tilt-lcd"), IDLE);

  for (const id of ["pitch", "roll"]) {
    $(id).addEventListener("input", () => ($(`${id}-v`).textContent = $(id).value));
  }
  $("level").addEventListener("click", () => {
    for (const id of ["pitch", "roll"]) {
      $(id).value = 0;
      $(`${id}-v`).textContent = "0";
    }
  });

  function draw(state) {
    const { width: w, height: h } = canvas;
    ctx.clearRect(0, 0, w, h);
    ctx.strokeStyle = "#bbb";
    const r30 = (30 / 90) * (w / 2);
    ctx.strokeRect(w / 2 - r30, h / 2 - r30, 2 * r30, 2 * r30);
    ctx.beginPath();
    ctx.moveTo(w / 2, 0); ctx.lineTo(w / 2, h);
    ctx.moveTo(0, h / 2); ctx.lineTo(w, h / 2);
    ctx.stroke();
    const x = w / 2 + ((state.roll_deg ?? 0) / 90) * (w / 2);
    const y = h / 2 - ((state.pitch_deg ?? 0) / 90) * (h / 2);
    ctx.fillStyle = state.class === "Neutral" ? "#888" : "#c0392b";
    ctx.beginPath();
    ctx.arc(x, y, 8, 0, 2 * Math.PI);
    ctx.fill();
  }

  setInterval(() => {
    const state = JSON.parse(pad.sample(Number($("pitch").value), Number($("roll").value)));
    $("tilt-class").textContent = state.message ? `${state.class} (${state.message})` : state.class;
    if (state.event) {
      const e = state.event;
      log.unshift(`${state.t_ms} ms  ${e.message}${e.escalate ? "  ESCALATE" : ""}`);
      lcd($("tilt-lcd"), [e.message, "ROOM 07"]);
      $("tilt-events").textContent = log.slice(0, 30).join("\n");
    }
    draw(state);
  }, pad.period_ms);
}

function ppgPanel() {
  const canvas = $("ppg-canvas");
  const ctx = canvas.getContext("2d");

  function render() {
    const bpm = Number($("bpm").value);
    const noise = Number($("noise").value);
    $("bpm-v").textContent = bpm;
    $("noise-v").textContent = noise.toFixed(3);
    const out = JSON.parse(ppg(bpm, noise, Number($("ppg-seed").value) >>> 0));
    $("bpm-est").textContent = out.bpm != null ? `${out.bpm.toFixed(1)} BPM (${out.peaks_ms.length} peaks)` : out.error;
    const { width: w, height: h } = canvas;
    ctx.clearRect(0, 0, w, h);
    if (!out.t_ms) return;
    const span = out.t_ms[out.t_ms.length - 1];
    const px = (t) => (t / span) * w;
    const py = (v) => h - 10 - v * (h - 20);
    ctx.strokeStyle = "#2c6db5";
    ctx.beginPath();
    out.t_ms.forEach((t, i) => (i ? ctx.lineTo(px(t), py(out.value[i])) : ctx.moveTo(px(t), py(out.value[i]))));
    ctx.stroke();
    ctx.strokeStyle = "#c0392b";
    for (const t of out.peaks_ms) {
      ctx.beginPath();
      ctx.moveTo(px(t), 0);
      ctx.lineTo(px(t), h);
      ctx.stroke();
    }
  }

  for (const id of ["bpm", "noise", "ppg-seed"]) $(id).addEventListener("input", render);
  render();
}

function scenarioPanel() {
  $("scenario").value = demo_scenario();
  $("run").addEventListener("click", () => {
    const out = JSON.parse(run_scenario($("scenario").value, Number($("scn-seed").value) >>> 0));
    const verdict = $("verdict");
    if (out.error) {
      verdict.className = "fail";
      verdict.textContent = `line ${out.error.line}: ${out.error.reason}`;
      return;
    }
    verdict.className = out.passed ? "pass" : "fail";
    verdict.textContent = out.passed ? "all expectations passed" : "expectation failed";
    lcd($("scn-lcd"), out.lcd);
    const c = out.channel;
    $("scn-channel").textContent = `frames sent ${c.sent}, dropped ${c.dropped}, corrupted ${c.corrupted}, duplicated ${c.duplicated}`;
    $("scn-expect").textContent = out.expectations
      .map((e) => `${e.passed ? "PASS" : "FAIL"} line ${e.line}: ${e.description}`)
      .join("\n");
    $("scn-outbox").textContent = out.outbox.map((r) => `${r.t_ms} ms  ${r.to}  ${r.body}`).join("\n") || "(empty)";
    $("scn-log").textContent = out.log;
  });
}

await init();
tiltPanel();
ppgPanel();
scenarioPanel();
