// Browser entry point: boot the app into the #app element.

import { App } from "./app.js";

const host = document.getElementById("app");
if (host) {
  new App(host).start();
}
