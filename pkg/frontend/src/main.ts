import { createApp } from "./app";

const params = new URLSearchParams(window.location.search);
createApp(document.getElementById("app")!, {
  baseUrl: params.get("api") ?? "",
  retrieverTag: params.get("retriever") ?? undefined,
  generatorTag: params.get("generator") ?? undefined,
});
