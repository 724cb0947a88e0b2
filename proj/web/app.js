// Pure client: shows the latest snapshot as-is and sends rate-limited slider input.
'use strict';

const FINGERS = ['thumb', 'index', 'middle', 'ring', 'little'];
const MAX_DEG = 80;
let ws = null;
let hello = null;
let latest = null;
let lastRx = 0;
let pending = null;
let lastSent = 0;

function bars(id, labels) {
  const host = document.getElementById(id);
  host.innerHTML = '';
  return labels.map((name) => {
    const row = document.createElement('div');
    row.className = 'row';
    row.innerHTML = `<span>${name}</span><div class="bar"><div></div></div><span class="v">0</span>`;
    host.appendChild(row);
    return { fill: row.querySelector('.bar > div'), value: row.querySelector('.v') };
  });
}

const currentBars = bars('current', FINGERS);
const dutyBars = bars('duty', FINGERS);
const thermalBars = bars('thermal', ['setpoint', 'glove']);

const sliders = FINGERS.map((name) => {
  const row = document.createElement('div');
  row.className = 'row';
  row.innerHTML = `<span>${name}</span><input type="range" min="0" max="${MAX_DEG}" step="0.088" value="0"><span class="v">0.000</span>`;
  document.getElementById('sliders').appendChild(row);
  const input = row.querySelector('input');
  const label = row.querySelector('.v');
  input.addEventListener('input', () => {
    label.textContent = Number(input.value).toFixed(3);
    pending = sliders.map((s) => Number(s.input.value));
  });
  return { input, label };
});

function show(bar, value, max, digits) {
  bar.fill.style.width = `${Math.max(0, Math.min(1, value / max)) * 100}%`;
  bar.value.textContent = value.toFixed(digits);
}

function render() {
  const stale = !ws || ws.readyState !== WebSocket.OPEN ||
      (hello && performance.now() - lastRx > hello.heartbeat_ms);
  const lost = stale || (latest && latest.link === 'LOST');
  const link = document.getElementById('link');
  link.textContent = stale ? 'DISCONNECTED' : (latest ? latest.link : '...');
  link.className = lost ? 'lost' : 'live';
  document.getElementById('banner').className = lost ? 'banner show' : 'banner';
  if (!latest) return;
  latest.current_mA.forEach((v, i) => show(currentBars[i], v, 1750, 0));
  latest.duty.forEach((v, i) => show(dutyBars[i], v, 1, 2));
  show(thermalBars[0], latest.setpoint_C, 60, 2);
  show(thermalBars[1], latest.glove_C, 60, 2);
  document.getElementById('status').textContent = JSON.stringify({
    tick: latest.tick, t_s: latest.t_s, scenario: latest.scenario, trial: latest.trial,
    object: latest.object, safe: latest.safe, grip_N: latest.grip_N,
    spilled_g: latest.spilled_g, dropped: latest.dropped, joint_deg: latest.joint_deg,
  }, null, 1);
}

function send(msg) {
  if (ws && ws.readyState === WebSocket.OPEN) {
    if (hello) msg.session = hello.session;
    ws.send(JSON.stringify(msg));
  }
}

function connect() {
  ws = new WebSocket(`${location.protocol === 'https:' ? 'wss' : 'ws'}://${location.host}/ws`);
  ws.onmessage = (ev) => {
    lastRx = performance.now();
    const msg = JSON.parse(ev.data);
    if (msg.type === 'hello') {
      hello = msg;
      const sel = document.getElementById('scenario');
      sel.innerHTML = msg.scenarios.map((n) => `<option${n === msg.scenario ? ' selected' : ''}>${n}</option>`).join('');
    } else if (msg.type === 'telemetry') {
      latest = msg;
    } else if (msg.type === 'error') {
      if (msg.code === 'stale_session') {
        ws.close();
      }
      console.warn(msg.code, msg.message);
    }
  };
  ws.onclose = () => setTimeout(connect, 1000);
}

document.getElementById('scenario').addEventListener('change', (ev) => send({ type: 'scenario', name: ev.target.value }));
document.getElementById('release').addEventListener('click', () => send({ type: 'release' }));

// outbound input capped at the server's advertised rate, newest value wins
setInterval(() => {
  const interval = 1000 / (hello ? hello.input_hz : 20);
  const now = performance.now();
  if (pending && now - lastSent >= interval) {
    send({ type: 'input', closure_deg: pending });
    pending = null;
    lastSent = now;
  }
}, 10);

(function loop() { render(); requestAnimationFrame(loop); })();
connect();
