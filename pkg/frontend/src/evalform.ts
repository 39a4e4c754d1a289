import { ANSWER_DIMENSIONS, DOC_DIMENSIONS } from "./types";
import type { EvalRecord, SourceCard } from "./types";

export interface EvalFormOptions {
  sources: SourceCard[];
  retrieverTag: string;
  generatorTag: string;
  onSubmit: (record: EvalRecord) => Promise<void>;
}

function ratingRow(groupName: string, dimension: string): HTMLElement {
  const row = document.createElement("div");
  row.className = "rating-row";
  const label = document.createElement("span");
  label.className = "rating-label";
  label.textContent = dimension;
  row.appendChild(label);
  for (let value = 1; value <= 5; value++) {
    const wrapper = document.createElement("label");
    wrapper.className = "rating-choice";
    const input = document.createElement("input");
    input.type = "radio";
    input.name = groupName;
    input.value = String(value);
    wrapper.appendChild(input);
    wrapper.appendChild(document.createTextNode(String(value)));
    row.appendChild(wrapper);
  }
  return row;
}

/** Build the Likert sheet: one five-point radio row per dimension, grouped by
 * retrieved document and by the generated answer. Submit stays disabled until
 * every row has a selection and the ids are filled in. */
export function renderEvalForm(container: HTMLElement, options: EvalFormOptions): void {
  container.innerHTML = "";
  const form = document.createElement("form");
  form.className = "eval-form";

  const ids = document.createElement("div");
  ids.className = "eval-ids";
  ids.innerHTML = `
    <label>Question #<input type="number" name="question_id" min="1" required></label>
    <label>Rater<input type="text" name="rater_id" required></label>
  `;
  form.appendChild(ids);

  for (const source of options.sources) {
    const fieldset = document.createElement("fieldset");
    fieldset.className = "eval-doc";
    const legend = document.createElement("legend");
    legend.textContent = `Retrieved document ${source.doc_id}`;
    fieldset.appendChild(legend);
    for (const dimension of DOC_DIMENSIONS) {
      fieldset.appendChild(ratingRow(`doc::${source.doc_id}::${dimension}`, dimension));
    }
    form.appendChild(fieldset);
  }

  const answerSet = document.createElement("fieldset");
  answerSet.className = "eval-answer";
  const legend = document.createElement("legend");
  legend.textContent = "Generated answer";
  answerSet.appendChild(legend);
  for (const dimension of ANSWER_DIMENSIONS) {
    answerSet.appendChild(ratingRow(`ans::${dimension}`, dimension));
  }
  form.appendChild(answerSet);

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.className = "eval-submit";
  submit.textContent = "Submit ratings";
  submit.disabled = true;
  form.appendChild(submit);

  const status = document.createElement("div");
  status.className = "eval-status";
  form.appendChild(status);

  const complete = (): boolean => {
    const question = form.querySelector<HTMLInputElement>("input[name=question_id]")!;
    const rater = form.querySelector<HTMLInputElement>("input[name=rater_id]")!;
    if (!question.value || !rater.value.trim()) return false;
    const groups = new Set<string>();
    form.querySelectorAll<HTMLInputElement>("input[type=radio]").forEach((r) => groups.add(r.name));
    for (const name of groups) {
      if (!form.querySelector(`input[name="${name}"]:checked`)) return false;
    }
    return true;
  };

  form.addEventListener("input", () => {
    submit.disabled = !complete();
  });

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    if (!complete()) return;
    const question = form.querySelector<HTMLInputElement>("input[name=question_id]")!;
    const rater = form.querySelector<HTMLInputElement>("input[name=rater_id]")!;
    const docRatings: Record<string, Record<string, number>> = {};
    for (const source of options.sources) {
      const sheet: Record<string, number> = {};
      for (const dimension of DOC_DIMENSIONS) {
        const checked = form.querySelector<HTMLInputElement>(
          `input[name="doc::${source.doc_id}::${dimension}"]:checked`,
        )!;
        sheet[dimension] = Number(checked.value);
      }
      docRatings[source.doc_id] = sheet;
    }
    const answerRatings: Record<string, number> = {};
    for (const dimension of ANSWER_DIMENSIONS) {
      const checked = form.querySelector<HTMLInputElement>(
        `input[name="ans::${dimension}"]:checked`,
      )!;
      answerRatings[dimension] = Number(checked.value);
    }
    const record: EvalRecord = {
      question_id: Number(question.value),
      config_id: { retriever: options.retrieverTag, generator: options.generatorTag },
      doc_ratings: docRatings,
      answer_ratings: answerRatings,
      rater_id: rater.value.trim(),
    };
    submit.disabled = true;
    try {
      await options.onSubmit(record);
      status.textContent = "Ratings recorded.";
      status.className = "eval-status ok";
    } catch (error) {
      status.textContent = error instanceof Error ? error.message : String(error);
      status.className = "eval-status error";
      submit.disabled = false;
    }
  });

  container.appendChild(form);
}
