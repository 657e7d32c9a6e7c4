// Dendrogram layout computed from the merge steps served by /hierarchy.
// Coordinates are normalized to [0, 1]; the view scales them to the SVG.

import type { Hierarchy } from "./types.js";

export interface NodePosition {
  x: number;
  y: number;
}

export interface Segment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface DendrogramLayout {
  leafOrder: number[];
  positions: Map<number, NodePosition>;
  segments: Segment[];
  maxDistance: number;
}

export function layoutDendrogram(tree: Hierarchy): DendrogramLayout {
  const K = tree.n_leaves;
  if (K < 1) {
    return { leafOrder: [], positions: new Map(), segments: [], maxDistance: 0 };
  }
  const children = new Map<number, [number, number]>();
  for (const step of tree.steps) {
    children.set(step.new_id, [step.left, step.right]);
  }

  // Leaves in traversal order keep subtrees contiguous (no crossing lines).
  const lastStep = tree.steps[tree.steps.length - 1];
  const root = lastStep ? lastStep.new_id : 0;
  const leafOrder: number[] = [];
  const stack = [root];
  while (stack.length > 0) {
    const node = stack.pop()!;
    const pair = children.get(node);
    if (pair === undefined) {
      leafOrder.push(node);
    } else {
      stack.push(pair[1], pair[0]); // left first out of the stack
    }
  }

  const maxDistance = tree.steps.reduce((m, s) => Math.max(m, s.distance), 0);
  const yScale = maxDistance > 0 ? maxDistance : 1;
  const positions = new Map<number, NodePosition>();
  leafOrder.forEach((leaf, i) => {
    positions.set(leaf, { x: (i + 0.5) / K, y: 0 });
  });
  for (const step of tree.steps) {
    const a = positions.get(step.left)!;
    const b = positions.get(step.right)!;
    positions.set(step.new_id, {
      x: (a.x + b.x) / 2,
      y: step.distance / yScale,
    });
  }

  const segments: Segment[] = [];
  for (const step of tree.steps) {
    const a = positions.get(step.left)!;
    const b = positions.get(step.right)!;
    const y = positions.get(step.new_id)!.y;
    segments.push({ x1: a.x, y1: a.y, x2: a.x, y2: y });
    segments.push({ x1: b.x, y1: b.y, x2: b.x, y2: y });
    segments.push({ x1: a.x, y1: y, x2: b.x, y2: y });
  }
  return { leafOrder, positions, segments, maxDistance };
}
