// Workspace screen: scene viewer and gallery on the left, threaded chat on
// the right, prompt tools in between. The scaffold is built once; update()
// re-renders the dynamic regions from the current session state.

import { clear, el } from './dom.js';
import {
  SessionState,
  expertChips,
  generationBadge,
  transcriptEntries,
  waitingFor,
} from './state.js';
import type { ArtifactMeta, ViewParams } from './types.js';

export interface WorkspaceHandlers {
  onPost: (content: string) => void;
  onViewChange: (patch: Partial<ViewParams>) => void;
  onSaveView: () => void;
  onGeneratePrompts: () => void;
  onEditPrompt: (index: number, text: string) => void;
  onRemovePrompt: (index: number) => void;
  onAppendPrompt: (text: string) => void;
  onGenerateImage: () => void;
  onNewRound: () => void;
  onEndSession: () => void;
  onQueryExpert: (role: string) => void;
  onRetryFacilitator: (round: number) => void;
}

export interface WorkspaceScreen {
  root: HTMLElement;
  update: (state: SessionState) => void;
}

/** Render the transcript list for a state. Exported on its own so tests can
 * replay recorded deltas and compare rendered output. */
export function renderTranscript(state: SessionState): HTMLUListElement {
  const list = el('ul', { className: 'transcript' });
  for (const entry of transcriptEntries(state)) {
    if (entry.kind === 'round_marker') {
      list.append(el('li', {
        className: 'round-marker',
        text: `Round ${entry.round}`,
        dataset: { round: String(entry.round) },
      }));
      continue;
    }
    if (entry.kind === 'pending') {
      list.append(el('li', { className: 'msg role-user pending' }, [
        el('span', { className: 'author', text: state.username }),
        el('span', { className: 'content', text: entry.pending!.content }),
        el('span', { className: 'sending', text: 'sending' }),
      ]));
      continue;
    }
    const m = entry.message!;
    const item = el('li', {
      className: `msg role-${m.role}`,
      dataset: { seq: String(m.seq) },
    }, [
      el('span', { className: 'author', text: m.author }),
      el('span', { className: 'content', text: m.content }),
    ]);
    if (m.attachment) {
      const artifactId = m.attachment.kind === 'artifact'
        ? m.attachment.id
        : m.attachment.artifact_id;
      if (artifactId) {
        item.append(el('span', {
          className: 'attachment',
          text: `[image ${artifactId}]`,
          dataset: { artifactId },
        }));
      }
    }
    list.append(item);
  }
  return list;
}

function numberInput(name: string, value: number,
                     onChange: (v: number) => void): HTMLInputElement {
  const input = el('input', { type: 'number', name, value: String(value) });
  input.addEventListener('change', () => {
    const v = Number(input.value);
    if (!Number.isNaN(v)) {
      onChange(v);
    }
  });
  return input;
}

export function buildWorkspace(handlers: WorkspaceHandlers,
                               artifactUrl: (id: string) => string,
                               exportUrl: string): WorkspaceScreen {
  // header
  const roundLabel = el('span', { className: 'round-label' });
  const statusLabel = el('span', { className: 'status-label' });
  const rosterBox = el('span', { className: 'roster-chips' });
  const newRoundButton = el('button', { className: 'new-round', text: 'New round' });
  const endButton = el('button', { className: 'end-session', text: 'End session' });
  const exportLink = el('a', {
    className: 'export-link', text: 'Export session', href: exportUrl,
    download: 'session.zip',
  });
  const noticeLine = el('p', { className: 'notice', hidden: true });
  const retryButton = el('button', {
    className: 'retry-facilitator', text: 'Retry synthesis', hidden: true,
  });

  // left panel: scene viewer, gallery, prompt tools
  const scenePreview = el('div', { className: 'scene-preview' });
  const headingInput = numberInput('heading', 135, (v) => handlers.onViewChange({ heading: v }));
  const pitchInput = numberInput('pitch', 0, (v) => handlers.onViewChange({ pitch: v }));
  const fovInput = numberInput('fov', 90, (v) => handlers.onViewChange({ fov: v }));
  const saveViewButton = el('button', { className: 'save-view', text: 'Save Current View' });
  const gallery = el('div', { className: 'gallery' });

  const generatePromptsButton = el('button', {
    className: 'generate-prompts', text: 'Generate AI Prompt',
  });
  const promptList = el('ul', { className: 'prompt-list' });
  const appendInput = el('input', {
    className: 'prompt-append-text', placeholder: 'add your own prompt',
  });
  const appendButton = el('button', { className: 'prompt-append', text: 'Add' });
  const generateImageButton = el('button', {
    className: 'generate-image', text: 'Generate AI Image', disabled: true,
  });

  // right panel: chat
  const waitingBanner = el('p', { className: 'waiting-banner', hidden: true });
  const transcriptBox = el('div', { className: 'transcript-box' });
  const postInput = el('input', {
    className: 'post-text', placeholder: 'share an idea for this place',
  });
  const postButton = el('button', { type: 'submit', text: 'Send' });
  const postForm = el('form', { className: 'post-form' }, [postInput, postButton]);

  const root = el('div', { className: 'workspace' }, [
    el('header', {}, [
      el('h1', { text: 'roundtable' }),
      roundLabel, statusLabel, rosterBox,
      newRoundButton, endButton, exportLink,
      noticeLine, retryButton,
    ]),
    el('div', { className: 'panels' }, [
      el('section', { className: 'scene-panel' }, [
        scenePreview,
        el('div', { className: 'view-controls' }, [
          el('label', { text: 'heading ' }, [headingInput]),
          el('label', { text: 'pitch ' }, [pitchInput]),
          el('label', { text: 'fov ' }, [fovInput]),
          saveViewButton,
        ]),
        gallery,
        el('div', { className: 'prompt-panel' }, [
          generatePromptsButton,
          promptList,
          el('div', { className: 'prompt-append-row' }, [appendInput, appendButton]),
          generateImageButton,
        ]),
      ]),
      el('section', { className: 'chat-panel' }, [
        waitingBanner,
        transcriptBox,
        postForm,
      ]),
    ]),
  ]);

  postForm.addEventListener('submit', (ev) => {
    ev.preventDefault();
    const content = postInput.value.trim();
    if (content) {
      postInput.value = '';
      handlers.onPost(content);
    }
  });
  saveViewButton.addEventListener('click', () => handlers.onSaveView());
  generatePromptsButton.addEventListener('click', () => handlers.onGeneratePrompts());
  appendButton.addEventListener('click', () => {
    const text = appendInput.value.trim();
    if (text) {
      appendInput.value = '';
      handlers.onAppendPrompt(text);
    }
  });
  generateImageButton.addEventListener('click', () => handlers.onGenerateImage());
  newRoundButton.addEventListener('click', () => handlers.onNewRound());
  endButton.addEventListener('click', () => handlers.onEndSession());

  let retryRound = 0;
  retryButton.addEventListener('click', () => handlers.onRetryFacilitator(retryRound));

  function updateScene(state: SessionState): void {
    clear(scenePreview);
    const scenes = state.artifacts.filter((a) => a.kind === 'source_scene');
    const latest = scenes[scenes.length - 1];
    if (latest) {
      scenePreview.append(el('img', {
        className: 'scene-image',
        src: artifactUrl(latest.artifact_id),
        alt: `scene ${latest.artifact_id}`,
      }));
    } else {
      const v = state.view;
      scenePreview.append(el('div', {
        className: 'scene-placeholder',
        text: `${v.panorama_id} | heading ${v.heading} | pitch ${v.pitch} | fov ${v.fov}`,
      }));
    }
  }

  function updateGallery(state: SessionState): void {
    clear(gallery);
    for (const artifact of state.artifacts) {
      gallery.append(renderArtifactCard(artifact, artifactUrl));
    }
  }

  function updatePrompts(state: SessionState): void {
    // Skip the rebuild while the user is typing in one of the edit fields;
    // the next update after blur catches up.
    if (promptList.contains(document.activeElement)) {
      return;
    }
    clear(promptList);
    const ps = state.promptSet;
    generateImageButton.disabled = ps === null || ps.items.length === 0;
    if (ps === null) {
      return;
    }
    ps.items.forEach((item, index) => {
      const textInput = el('input', {
        className: 'prompt-text', value: item.text,
        dataset: { index: String(index) },
      });
      textInput.addEventListener('change', () => {
        handlers.onEditPrompt(index, textInput.value);
      });
      const removeButton = el('button', { className: 'prompt-remove', text: 'Remove' });
      removeButton.addEventListener('click', () => handlers.onRemovePrompt(index));
      promptList.append(el('li', {
        className: item.valid ? 'prompt-item valid' : 'prompt-item invalid',
        dataset: { index: String(index), origin: item.origin },
      }, [
        el('span', {
          className: 'badge',
          text: item.valid ? 'valid' : 'check wording',
        }),
        textInput,
        removeButton,
      ]));
    });
  }

  function update(state: SessionState): void {
    const room = state.room;
    if (!room) {
      return;
    }
    roundLabel.textContent = `Round ${room.current_round}`;
    statusLabel.textContent = room.status;
    clear(rosterBox);
    for (const role of expertChips(room)) {
      const chip = el('span', { className: 'agent-chip', dataset: { role } }, [
        el('span', { text: `AI ${role} ` }),
      ]);
      const askButton = el('button', { className: `ask-${role}`, text: 'ask' });
      askButton.addEventListener('click', () => handlers.onQueryExpert(role));
      chip.append(askButton);
      rosterBox.append(chip);
    }

    const owed = waitingFor(room);
    if (owed.length > 0) {
      waitingBanner.hidden = false;
      waitingBanner.textContent =
        `Waiting for ${owed.length} participant${owed.length === 1 ? '' : 's'} ` +
        `this round: ${owed.join(', ')}`;
    } else {
      waitingBanner.hidden = true;
      waitingBanner.textContent = '';
    }

    if (state.notice) {
      noticeLine.hidden = false;
      noticeLine.textContent = state.notice;
      if (state.notice.includes('synthesis')) {
        retryRound = room.current_round - 1;
        retryButton.hidden = false;
      }
    } else {
      noticeLine.hidden = true;
      retryButton.hidden = true;
    }

    const ended = room.status === 'ended';
    postInput.disabled = ended;
    postButton.disabled = ended;
    newRoundButton.disabled = ended;
    endButton.disabled = ended;
    saveViewButton.disabled = ended;
    generatePromptsButton.disabled = ended;

    clear(transcriptBox);
    transcriptBox.append(renderTranscript(state));
    updateScene(state);
    updateGallery(state);
    updatePrompts(state);
  }

  return { root, update };
}

function renderArtifactCard(artifact: ArtifactMeta,
                            artifactUrl: (id: string) => string): HTMLElement {
  const lineage = artifact.parent_artifact
    ? `from ${artifact.parent_artifact}`
    : 'saved view';
  return el('div', {
    className: `artifact-card kind-${artifact.kind}`,
    dataset: { artifactId: artifact.artifact_id },
  }, [
    el('img', {
      src: artifactUrl(artifact.artifact_id),
      alt: artifact.artifact_id,
    }),
    el('span', { className: 'badge generation', text: generationBadge(artifact) }),
    el('span', {
      className: 'lineage',
      text: `${lineage} | round ${artifact.created_round}`,
    }),
  ]);
}
