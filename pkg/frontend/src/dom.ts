// Small DOM construction helper so renderers stay readable without a
// framework.

export interface ElProps {
  className?: string;
  id?: string;
  text?: string;
  title?: string;
  href?: string;
  src?: string;
  alt?: string;
  type?: string;
  value?: string;
  placeholder?: string;
  name?: string;
  download?: string;
  hidden?: boolean;
  disabled?: boolean;
  dataset?: Record<string, string>;
}

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  props: ElProps = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (props.className !== undefined) node.className = props.className;
  if (props.id !== undefined) node.id = props.id;
  if (props.text !== undefined) node.textContent = props.text;
  if (props.title !== undefined) node.title = props.title;
  if (props.hidden !== undefined) node.hidden = props.hidden;
  if (props.href !== undefined) (node as unknown as HTMLAnchorElement).href = props.href;
  if (props.download !== undefined) {
    (node as unknown as HTMLAnchorElement).download = props.download;
  }
  if (props.src !== undefined) (node as unknown as HTMLImageElement).src = props.src;
  if (props.alt !== undefined) (node as unknown as HTMLImageElement).alt = props.alt;
  if (props.type !== undefined) (node as unknown as HTMLInputElement).type = props.type;
  if (props.value !== undefined) (node as unknown as HTMLInputElement).value = props.value;
  if (props.placeholder !== undefined) {
    (node as unknown as HTMLInputElement).placeholder = props.placeholder;
  }
  if (props.name !== undefined) (node as unknown as HTMLInputElement).name = props.name;
  if (props.disabled !== undefined) {
    (node as unknown as HTMLButtonElement).disabled = props.disabled;
  }
  if (props.dataset) {
    for (const [k, v] of Object.entries(props.dataset)) {
      node.dataset[k] = v;
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}
