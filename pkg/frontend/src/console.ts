// Script console: send a script to /api/eval, show its output and result.

import { ApiClient, ApiError } from "./api.js";

export class ScriptConsole {
  constructor(
    private api: ApiClient,
    private input: HTMLTextAreaElement,
    private log: HTMLElement,
    runButton: HTMLButtonElement,
  ) {
    runButton.addEventListener("click", () => void this.run());
    this.input.addEventListener("keydown", (event) => {
      if (event.key === "Enter" && (event.ctrlKey || event.metaKey)) {
        void this.run();
      }
    });
  }

  async run(): Promise<void> {
    const script = this.input.value.trim();
    if (!script) return;
    this.append(`> ${script}`, "console-cmd");
    try {
      const { result, output, tstep } = await this.api.evalScript(script);
      if (output) this.append(output.replace(/\n$/, ""), "console-out");
      const suffix = tstep !== null && tstep !== undefined ? `  (tstep ${tstep})` : "";
      this.append(`${result || "(empty)"}${suffix}`, "console-result");
    } catch (error) {
      const text = error instanceof ApiError
        ? `${error.kind}: ${error.message}`
        : String(error);
      this.append(text, "console-error");
    }
  }

  private append(text: string, className: string): void {
    const line = document.createElement("div");
    line.className = className;
    line.textContent = text;
    this.log.appendChild(line);
    this.log.scrollTop = this.log.scrollHeight;
  }
}
