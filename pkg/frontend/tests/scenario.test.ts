// @vitest-environment jsdom
//
// Drives the full co-design session through the rendered DOM against a real
// gateway process running mock providers: lobby, rounds with facilitator
// synthesis, planner query, prompt extraction and editing, two image
// generations, export download, session end.

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { App } from '../src/app.js';
import { Backend, startBackend, until } from './backend.js';

let backend: Backend;

beforeAll(async () => {
  backend = await startBackend();
}, 30_000);

afterAll(() => {
  backend?.stop();
});

function makeApp(): { app: App; root: HTMLElement } {
  const root = document.createElement('div');
  document.body.append(root);
  const app = new App(root, { baseUrl: backend.baseUrl, pollIntervalMs: 120 });
  return { app, root };
}

function fill(root: HTMLElement, selector: string, value: string): void {
  const input = root.querySelector(selector) as HTMLInputElement;
  input.value = value;
  input.dispatchEvent(new Event('change', { bubbles: true }));
}

function click(root: HTMLElement, selector: string): void {
  const node = root.querySelector(selector) as HTMLElement;
  expect(node, `expected element ${selector}`).not.toBeNull();
  node.dispatchEvent(new MouseEvent('click', { bubbles: true, cancelable: true }));
}

function submit(root: HTMLElement, selector: string): void {
  const form = root.querySelector(selector) as HTMLFormElement;
  form.dispatchEvent(new Event('submit', { bubbles: true, cancelable: true }));
}

function texts(root: HTMLElement, selector: string): string[] {
  return Array.from(root.querySelectorAll(selector)).map((n) => n.textContent ?? '');
}

describe('co-design session through the workspace', () => {
  it('runs lobby to export end to end', async () => {
    const { app, root } = makeApp();
    const peer = new ApiClient(backend.baseUrl);
    const room = 'esplanade';

    // Lobby: resident_a joins through the form with a planner picked at
    // creation; resident_b joins from a second client.
    (root.querySelector('input[name="username"]') as HTMLInputElement).value = 'resident_a';
    (root.querySelector('input[name="room"]') as HTMLInputElement).value = room;
    (root.querySelector('input[name="planner"]') as HTMLInputElement).checked = true;
    submit(root, '#join-form');
    await until(() => root.querySelector('.lobby-status:not([hidden])') !== null,
      15_000, 'lobby roster');
    await until(() => texts(root, '.lobby-roster li').join(' ').includes('AI planner'),
      15_000, 'planner chip in lobby roster');

    await peer.join(room, 'resident_b');
    await until(() => texts(root, '.lobby-roster li').some((t) => t.includes('resident_b')),
      15_000, 'second participant in roster');

    click(root, '.ready-toggle');
    await until(() => texts(root, '.lobby-roster li')
      .some((t) => t.includes('resident_a (ready)')), 15_000, 'own readiness');

    await peer.setReady(room, 'resident_b', true);
    await until(() => root.querySelector('.workspace') !== null, 15_000, 'workspace');
    expect((root.querySelector('.status-label') as HTMLElement).textContent).toBe('active');
    expect(root.querySelector('.agent-chip[data-role="planner"]')).not.toBeNull();

    // Scene: before any snapshot the placeholder tracks the view controls.
    expect(root.querySelector('.scene-placeholder')).not.toBeNull();
    fill(root, 'input[name="heading"]', '210');
    await until(() => (root.querySelector('.scene-placeholder')?.textContent ?? '')
      .includes('heading 210'), 5_000, 'placeholder view update');

    click(root, '.save-view');
    await until(() => root.querySelector('.artifact-card') !== null, 15_000, 'gallery card');
    expect(texts(root, '.artifact-card .badge')).toEqual(['source']);
    expect(root.querySelector('.scene-preview img')).not.toBeNull();

    // Round 1: the local message echoes optimistically, then the server
    // copy replaces it; the banner says who the round still waits on.
    fill(root, '.post-text', 'I want more green and a tree-lined street.');
    submit(root, '.post-form');
    expect(root.querySelector('.transcript .pending')).not.toBeNull();
    await until(() => texts(root, '.msg.role-user .content')
      .includes('I want more green and a tree-lined street.')
      && root.querySelector('.transcript .pending') === null,
      15_000, 'echo reconciliation');
    const banner = root.querySelector('.waiting-banner') as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain('resident_b');

    await peer.postMessage(room, 'resident_b',
      'Please add some benches so people can sit and the street looks more friendly.');
    await until(() => root.querySelector('.msg.role-facilitator') !== null,
      15_000, 'facilitator synthesis');
    await until(() => (root.querySelector('.round-label') as HTMLElement)
      .textContent === 'Round 2', 15_000, 'round advance');

    // Round 2: ask the planner, then extract prompts.
    click(root, '.ask-planner');
    await until(() => root.querySelector('.msg.role-planner') !== null,
      15_000, 'planner reply');

    click(root, '.generate-prompts');
    await until(() => root.querySelectorAll('.prompt-item').length >= 4,
      15_000, 'prompt list');
    const extractedCount = root.querySelectorAll('.prompt-item').length;
    expect(extractedCount).toBeLessThanOrEqual(6);
    expect(texts(root, '.prompt-item .badge')).toContain('valid');

    // Prompt editor round trip: edit, remove, append.
    fill(root, '.prompt-item[data-index="0"] .prompt-text',
      'Plant native street trees along the full block frontage');
    await until(() => root.querySelector('.prompt-item[data-index="0"]')!
      .getAttribute('data-origin') === 'user_edited', 15_000, 'edit round trip');
    expect((root.querySelector(
      '.prompt-item[data-index="0"] .prompt-text') as HTMLInputElement).value)
      .toBe('Plant native street trees along the full block frontage');

    const removedText = (root.querySelector(
      '.prompt-item[data-index="1"] .prompt-text') as HTMLInputElement).value;
    click(root, '.prompt-item[data-index="1"] .prompt-remove');
    await until(() => root.querySelectorAll('.prompt-item').length === extractedCount - 1,
      15_000, 'remove round trip');
    const afterRemove = Array.from(root.querySelectorAll('.prompt-text'))
      .map((n) => (n as HTMLInputElement).value);
    expect(afterRemove).not.toContain(removedText);

    fill(root, '.prompt-append-text',
      'add sustainable wooden benches and planters along the sidewalk');
    click(root, '.prompt-append');
    await until(() => root.querySelectorAll('.prompt-item').length === extractedCount,
      15_000, 'append round trip');
    const lastItem = root.querySelector(
      `.prompt-item[data-index="${extractedCount - 1}"]`) as HTMLElement;
    expect(lastItem.dataset.origin).toBe('user_added');

    // The server holds exactly what the editor shows.
    const serverSet = await peer.getPromptSet(app.state!.promptSet!.prompt_set_id);
    const domTexts = Array.from(root.querySelectorAll('.prompt-text'))
      .map((n) => (n as HTMLInputElement).value);
    expect(serverSet.items.map((i) => i.text)).toEqual(domTexts);

    // Images: first and second generation revisions land in the gallery
    // and are announced in the chat.
    click(root, '.generate-image');
    await until(() => texts(root, '.artifact-card .badge').includes('generation 1'),
      15_000, 'first revision');
    click(root, '.generate-image');
    await until(() => texts(root, '.artifact-card .badge').includes('generation 2'),
      15_000, 'second revision');
    expect(texts(root, '.artifact-card .badge'))
      .toEqual(['source', 'generation 1', 'generation 2']);
    expect(root.querySelectorAll('.msg.role-system .attachment').length)
      .toBeGreaterThanOrEqual(3);

    // Export: the link downloads a zip of the session.
    const href = (root.querySelector('.export-link') as HTMLAnchorElement).href;
    const res = await fetch(href);
    expect(res.status).toBe(200);
    expect(res.headers.get('content-type')).toBe('application/zip');
    const body = Buffer.from(await res.arrayBuffer());
    expect(body.subarray(0, 2).toString('latin1')).toBe('PK');
    const names = body.toString('latin1');
    expect(names).toContain('manifest.json');
    expect(names).toContain('transcript.jsonl');
    expect(names).toContain('images/');

    // The rendered transcript equals the server log.
    const full = await peer.getState(room, 0);
    const rendered = Array.from(root.querySelectorAll('.msg[data-seq]')) as HTMLElement[];
    expect(rendered.map((n) => Number(n.dataset.seq)))
      .toEqual(full.messages.map((m) => m.seq));
    for (const [i, m] of full.messages.entries()) {
      expect(rendered[i].querySelector('.author')!.textContent).toBe(m.author);
      expect(rendered[i].querySelector('.content')!.textContent).toBe(m.content);
    }

    // End the session; the workspace locks.
    click(root, '.end-session');
    await until(() => (root.querySelector('.status-label') as HTMLElement)
      .textContent === 'ended', 15_000, 'session end');
    expect((root.querySelector('.post-text') as HTMLInputElement).disabled).toBe(true);
    await until(() => texts(root, '.msg.role-system .content')
      .some((t) => t.includes('ended the session')), 15_000, 'closing notice');

    app.stop();
  }, 120_000);

  it('keeps the join form with an inline error on a duplicate name', async () => {
    const first = makeApp();
    (first.root.querySelector('input[name="username"]') as HTMLInputElement).value = 'casey';
    (first.root.querySelector('input[name="room"]') as HTMLInputElement).value = 'dup-check';
    submit(first.root, '#join-form');
    await until(() => first.root.querySelector('.lobby-status:not([hidden])') !== null,
      15_000, 'first join');

    const second = makeApp();
    (second.root.querySelector('input[name="username"]') as HTMLInputElement).value = 'casey';
    (second.root.querySelector('input[name="room"]') as HTMLInputElement).value = 'dup-check';
    submit(second.root, '#join-form');
    await until(() => second.root.querySelector('.form-error:not([hidden])') !== null,
      15_000, 'inline error');
    const error = second.root.querySelector('.form-error') as HTMLElement;
    expect(error.textContent).toContain('casey');
    expect((second.root.querySelector('#join-form') as HTMLFormElement).hidden).toBe(false);
    expect(second.root.querySelector('.workspace')).toBeNull();

    first.app.stop();
    second.app.stop();
  }, 60_000);
});
