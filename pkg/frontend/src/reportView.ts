// Report sections with the chain-of-thought dropdown: one collapsible entry
// per agent trace, in pipeline order, collapsed by default.

import { ApiClient } from "./api";
import type { AgentTrace, ReportResponse } from "./types";

export class ReportView {
  private sessionId = "";

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
  ) {
    this.root.classList.add("report-view");
  }

  async generate(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    const report = await this.api.generateReport(sessionId);
    this.render(report);
  }

  render(report: ReportResponse): void {
    this.root.replaceChildren();
    for (const [title, body] of [
      ["FINDINGS", report.findings],
      ["DIAGNOSIS", report.diagnosis],
      ["GUIDELINES", report.guidelines],
    ] as const) {
      const section = document.createElement("section");
      section.className = `report-section report-${title.toLowerCase()}`;
      const heading = document.createElement("h3");
      heading.textContent = title;
      const text = document.createElement("p");
      text.textContent = body;
      section.append(heading, text);
      this.root.appendChild(section);
    }
    this.root.appendChild(this.buildTraceDropdown(report.traces));

    const regenerate = document.createElement("button");
    regenerate.className = "regenerate-report";
    regenerate.textContent = "Regenerate report";
    regenerate.addEventListener("click", () => {
      void this.generate(this.sessionId);
    });
    this.root.appendChild(regenerate);
  }

  private buildTraceDropdown(traces: AgentTrace[]): HTMLElement {
    const dropdown = document.createElement("details");
    dropdown.className = "chain-of-thought";
    dropdown.open = false; // collapsed by default
    const summary = document.createElement("summary");
    summary.textContent = `Chain of thought (${traces.length} agents)`;
    dropdown.appendChild(summary);

    for (const trace of traces) {
      const agent = document.createElement("details");
      agent.className = "agent-trace";
      agent.dataset.agentName = trace.agent_name;
      const agentSummary = document.createElement("summary");
      agentSummary.textContent = `${trace.agent_name} (${trace.steps.length} steps, ${trace.terminated_by})`;
      agent.appendChild(agentSummary);

      const steps = document.createElement("ol");
      steps.className = "trace-steps";
      for (const step of trace.steps) {
        const item = document.createElement("li");
        item.className = "trace-step";
        for (const [label, value] of [
          ["Thought", step.thought],
          ["Action", step.action],
          ["Observation", step.observation],
        ] as const) {
          if (value === null || value === undefined) continue;
          const line = document.createElement("div");
          line.className = `step-${label.toLowerCase()}`;
          line.textContent = `${label}: ${value}`;
          item.appendChild(line);
        }
        steps.appendChild(item);
      }
      agent.appendChild(steps);

      const finalAnswer = document.createElement("div");
      finalAnswer.className = "trace-final";
      finalAnswer.textContent = `Final: ${trace.final_answer}`;
      agent.appendChild(finalAnswer);
      dropdown.appendChild(agent);
    }
    return dropdown;
  }
}
