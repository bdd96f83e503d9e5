import type { AnnotatedDocument } from "./types.js";

export interface DocumentSummary {
  id: string;
  title: string;
}

export async function fetchDocuments(base = ""): Promise<DocumentSummary[]> {
  const resp = await fetch(`${base}/documents`);
  if (!resp.ok) throw new Error(`GET /documents failed: ${resp.status}`);
  return (await resp.json()) as DocumentSummary[];
}

export async function fetchDocument(
  id: string,
  base = "",
): Promise<AnnotatedDocument> {
  const resp = await fetch(`${base}/documents/${encodeURIComponent(id)}`);
  if (!resp.ok) throw new Error(`GET /documents/${id} failed: ${resp.status}`);
  return (await resp.json()) as AnnotatedDocument;
}
