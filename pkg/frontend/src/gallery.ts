// Sample gallery: one n-column row of decoded component draws per
// selected class (or every class). n = 0 issues no request at all.

import { Client } from "./api.js";

export interface GalleryRow {
  cls: number;
  xs: number[][];
}

export async function sampleGallery(
  client: Client,
  classes: number[],
  n: number,
  seed: number,
): Promise<GalleryRow[]> {
  if (n <= 0) return [];
  const rows: GalleryRow[] = [];
  for (const cls of classes) {
    // per-class seed offset keeps rows distinct but reproducible
    const { xs } = await client.sample(cls, n, seed + cls);
    rows.push({ cls, xs });
  }
  return rows;
}
