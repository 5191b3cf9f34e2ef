/** Dashboard bootstrap: session lifecycle, control wiring, poll loop. */

import { ApiClient, ApiRequestError } from "./api.js";
import { FrameBuffer } from "./buffer.js";
import {
  renderAgentDots,
  renderDecisionsChart,
  renderSatisfactionChart,
  renderSharesChart,
  type Draw2D,
  type TickMarker,
} from "./charts.js";
import {
  clampScale,
  envSlidersFromObjective,
  flagsFromAck,
  mutationForFlags,
  mutationForSlider,
  sliderKey,
  valueFromAck,
  type SliderState,
} from "./controls.js";
import { PollLoop } from "./poll.js";
import { CRITERIA, MODES, type SessionInfo, type StateSnapshot } from "./types.js";

const POLL_INTERVAL_MS = 500;
const DOTS_REFRESH_MS = 1000;

const apiBase = new URLSearchParams(location.search).get("api") ?? "";
const api = new ApiClient(apiBase);

const buffer = new FrameBuffer();
const markers: TickMarker[] = [];
let session: SessionInfo | null = null;
let playing = false;
let dotsTimer: number | null = null;

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
};

const banner = $("banner");
const sliderInputs = new Map<string, HTMLInputElement>();

function showBanner(text: string): void {
  banner.textContent = text;
  banner.classList.add("visible");
}

function hideBanner(): void {
  banner.classList.remove("visible");
}

function ctx2d(id: string): { ctx: Draw2D; w: number; h: number } {
  const canvas = $(id) as unknown as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    throw new Error("canvas 2d context unavailable");
  }
  return { ctx: ctx as unknown as Draw2D, w: canvas.width, h: canvas.height };
}

function renderCharts(): void {
  const frames = buffer.all();
  const shares = ctx2d("chart-shares");
  renderSharesChart(shares.ctx, { width: shares.w, height: shares.h }, frames, markers);
  const sat = ctx2d("chart-satisfaction");
  renderSatisfactionChart(sat.ctx, { width: sat.w, height: sat.h }, frames, markers);
  const dec = ctx2d("chart-decisions");
  renderDecisionsChart(dec.ctx, { width: dec.w, height: dec.h }, frames, markers);
  $("tick-label").textContent = `tick ${buffer.lastTick}`;
}

async function refreshDots(): Promise<void> {
  if (!session) {
    return;
  }
  const snapshot = await api.snapshot(session.session_id);
  const dots = ctx2d("agent-dots");
  renderAgentDots(dots.ctx, { width: dots.w, height: dots.h },
    snapshot.agents.map((a) => a.current_mode));
}

async function fetchNewer(): Promise<void> {
  if (!session) {
    return;
  }
  try {
    const body = await api.metrics(session.session_id, buffer.nextTick());
    if (buffer.append(body.frames) > 0) {
      renderCharts();
    }
  } catch (error) {
    if (error instanceof ApiRequestError && error.code === "session_not_found") {
      playing = false;
      showBanner("Session expired. Press “new session” to start another run.");
      return;
    }
    throw error;
  }
}

const poll = new PollLoop(
  {
    fetchNewer,
    onError: (_error, nextDelayMs) =>
      showBanner(`Connection problem; retrying in ${(nextDelayMs / 1000).toFixed(1)} s`),
    onRecovered: hideBanner,
  },
  POLL_INTERVAL_MS,
);

// ---------------------------------------------------------------- controls

function makeSliderRow(parent: HTMLElement, slider: SliderState): void {
  const row = document.createElement("label");
  row.className = "slider-row";
  const name = slider.kind === "env" ? slider.criterion : slider.criterion;
  const caption = document.createElement("span");
  caption.textContent = name;
  const input = document.createElement("input");
  input.type = "range";
  input.min = "0";
  input.max = "10";
  input.step = "0.1";
  input.value = String(clampScale(slider.value));
  const out = document.createElement("output");
  out.textContent = Number(input.value).toFixed(1);
  input.addEventListener("change", async () => {
    try {
      const ack = await api.mutate(session!.session_id, mutationForSlider(
        slider, Number(input.value)));
      const applied = valueFromAck(slider, ack);
      input.value = String(applied);
      out.textContent = applied.toFixed(1);
      markers.push({ tick: ack.tick, label: ack.command });
      renderCharts();
    } catch (error) {
      showBanner(error instanceof Error ? error.message : String(error));
    }
  });
  input.addEventListener("input", () => {
    out.textContent = Number(input.value).toFixed(1);
  });
  sliderInputs.set(sliderKey(slider), input);
  row.append(caption, input, out);
  parent.appendChild(row);
}

function buildControlPanels(snapshot: StateSnapshot): void {
  sliderInputs.clear();
  const envRoot = $("env-sliders");
  envRoot.textContent = "";
  for (const slider of envSlidersFromObjective(snapshot.objective, MODES, CRITERIA)) {
    let group = envRoot.querySelector<HTMLElement>(`[data-mode="${slider.mode}"]`);
    if (!group) {
      group = document.createElement("fieldset");
      group.dataset.mode = slider.mode;
      const legend = document.createElement("legend");
      legend.textContent = slider.mode;
      group.appendChild(legend);
      envRoot.appendChild(group);
    }
    makeSliderRow(group, slider);
  }

  const prioRoot = $("priority-sliders");
  prioRoot.textContent = "";
  CRITERIA.forEach((criterion, c) => {
    const mean = snapshot.agents.length
      ? snapshot.agents.reduce((acc, a) => acc + a.priorities[c], 0) / snapshot.agents.length
      : 5;
    makeSliderRow(prioRoot, { kind: "priority", criterion, value: mean });
  });

  const biases = $("toggle-biases") as unknown as HTMLInputElement;
  const habits = $("toggle-habits") as unknown as HTMLInputElement;
  biases.checked = snapshot.flags.biases_on;
  habits.checked = snapshot.flags.habits_on;
  const pushFlags = async () => {
    const ack = await api.mutate(session!.session_id, mutationForFlags(
      { biases: biases.checked, habits: habits.checked }));
    const applied = flagsFromAck(ack);
    biases.checked = applied.biases;
    habits.checked = applied.habits;
    markers.push({ tick: ack.tick, label: "flags" });
  };
  biases.onchange = pushFlags;
  habits.onchange = pushFlags;
}

async function newSession(): Promise<void> {
  const seed = Number((($("seed-input")) as unknown as HTMLInputElement).value) || 0;
  poll.stop();
  playing = false;
  buffer.clear();
  markers.length = 0;
  hideBanner();
  session = await api.createSession(seed, {}, `dash-${Date.now()}-${Math.random()}`);
  $("session-label").textContent = `session ${session.session_id.slice(0, 8)} (seed ${seed})`;
  buildControlPanels(session.snapshot);
  renderCharts();
  await refreshDots();
  poll.start();
  if (dotsTimer === null) {
    dotsTimer = setInterval(() => {
      if (playing) {
        void refreshDots().catch(() => undefined);
      }
    }, DOTS_REFRESH_MS) as unknown as number;
  }
}

function wireButtons(): void {
  $("btn-new").onclick = () => void newSession().catch(
    (error) => showBanner(String(error)));
  $("btn-step").onclick = async () => {
    if (!session) {
      return;
    }
    await api.step(session.session_id, 1);
    await fetchNewer();
    await refreshDots();
  };
  const playButton = $("btn-play") as unknown as HTMLButtonElement;
  playButton.onclick = async () => {
    if (!session) {
      return;
    }
    playing = !playing;
    const tps = Number((($("tps-input")) as unknown as HTMLInputElement).value) || 10;
    await api.setAutoRun(session.session_id, playing, tps);
    playButton.textContent = playing ? "pause" : "play";
  };
  $("btn-reset").onclick = async () => {
    if (!session) {
      return;
    }
    const ack = await api.mutate(session.session_id, { command: "reset-habits" });
    markers.push({ tick: ack.tick, label: "reset" });
    renderCharts();
  };
}

wireButtons();
void newSession().catch((error) => showBanner(
  `Could not reach the simulation service: ${error}`));
