/**
 * Collection tree and search-scope selection.
 * The selection feeds the collection_ids of the next outgoing user_message.
 */

export interface CollectionInfo {
  id: string;
  name: string;
  owner_id: string;
  parent_id: string | null;
  permission?: "VIEW" | "EDIT";
}

export interface TreeNode {
  collection: CollectionInfo;
  children: TreeNode[];
}

/** Arrange the flat, permission-filtered listing into a forest. A child whose
 * parent is not visible to this user becomes a root. */
export function buildTree(collections: CollectionInfo[]): TreeNode[] {
  const nodes = new Map<string, TreeNode>();
  for (const c of collections) {
    nodes.set(c.id, { collection: c, children: [] });
  }
  const roots: TreeNode[] = [];
  for (const node of nodes.values()) {
    const parentId = node.collection.parent_id;
    const parent = parentId === null ? undefined : nodes.get(parentId);
    if (parent) {
      parent.children.push(node);
    } else {
      roots.push(node);
    }
  }
  const byName = (a: TreeNode, b: TreeNode) =>
    a.collection.name.localeCompare(b.collection.name);
  for (const node of nodes.values()) node.children.sort(byName);
  roots.sort(byName);
  return roots;
}

export class ScopeSelection {
  private known = new Set<string>();
  private checked = new Set<string>();

  /** Replace the set of selectable collections; stale checks are dropped. */
  setCollections(collections: CollectionInfo[]): void {
    this.known = new Set(collections.map((c) => c.id));
    for (const id of [...this.checked]) {
      if (!this.known.has(id)) this.checked.delete(id);
    }
  }

  toggle(id: string, on?: boolean): void {
    if (!this.known.has(id)) return;
    const want = on ?? !this.checked.has(id);
    if (want) {
      this.checked.add(id);
    } else {
      this.checked.delete(id);
    }
  }

  isChecked(id: string): boolean {
    return this.checked.has(id);
  }

  /** Checkbox state at this instant, in stable order. */
  selectedIds(): string[] {
    return [...this.checked].sort();
  }
}
