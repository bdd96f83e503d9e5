import { fetchDocument, fetchDocuments } from "./api.js";
import { createApp, renderErrorBanner } from "./render.js";
import { decodeState, encodeState } from "./state.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  try {
    const params = new URLSearchParams(window.location.search);
    let id = params.get("doc");
    if (!id) {
      const docs = await fetchDocuments();
      if (docs.length === 0) throw new Error("no documents available");
      id = docs[0].id;
    }
    const doc = await fetchDocument(id);
    const state = decodeState(window.location.search);
    createApp(root, doc, state, (next) => {
      const query = encodeState(next);
      const suffix = query ? `?doc=${id}&${query}` : `?doc=${id}`;
      window.history.replaceState(null, "", suffix);
    });
  } catch (err) {
    renderErrorBanner(root, `Could not load document: ${String(err)}`);
  }
}

void boot();
