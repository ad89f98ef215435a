/**
 * Console entry point: wires the chip composer, draft panel, heatmap and
 * stats tabs to the /v1 API.
 *
 * State is per browser session.  The session stores review text and the
 * control sequences that were generated, not the drafts themselves: on reload
 * the requests are replayed against the service, which is deterministic, so
 * the identical drafts reappear.
 */

import { ApiError, MredClient, type ReviewIn } from "./api.js";
import {
  appendChip,
  canGenerate,
  clearChips,
  removeChip,
  type ChipSequence,
} from "./chips.js";
import { isDuplicateOf, type Draft } from "./drafts.js";
import { buildHeatmap } from "./heatmap.js";
import { ALL_LABELS } from "./palette.js";
import {
  composerChip,
  draftCard,
  el,
  heatmapTable,
  paletteButton,
  statsSummary,
  type DraftFlags,
} from "./render.js";

const SESSION_KEY = "mred-console";

type SavedSession = {
  reviews: string;
  engine: string;
  chips: ChipSequence;
  requests: ChipSequence[];
};

function loadSession(): SavedSession | null {
  try {
    const raw = sessionStorage.getItem(SESSION_KEY);
    return raw ? (JSON.parse(raw) as SavedSession) : null;
  } catch {
    return null;
  }
}

function must(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id} in index.html`);
  return node;
}

function parseReviews(text: string): ReviewIn[] {
  return text
    .split(/\n\s*\n/)
    .map((block) => block.trim())
    .filter((block) => block.length > 0)
    .map((block) => ({ text: block.replace(/\s+/g, " ") }));
}

class Console {
  private readonly client = new MredClient();
  private chips: ChipSequence = [];
  private drafts: Draft[] = [];
  private requests: ChipSequence[] = [];
  private queue: Promise<void> = Promise.resolve();
  private pending = 0;
  private heatmapLoaded = false;
  private statsLoaded = false;

  private readonly reviewsInput = must("reviews") as HTMLTextAreaElement;
  private readonly engineSelect = must("engine") as HTMLSelectElement;
  private readonly composer = must("composer");
  private readonly generateButton = must("generate") as HTMLButtonElement;
  private readonly status = must("status");
  private readonly errorBanner = must("error");
  private readonly draftsPanel = must("drafts");

  start(): void {
    for (const label of ALL_LABELS) {
      must("palette").appendChild(
        paletteButton(label, () => this.setChips(appendChip(this.chips, label))),
      );
    }
    must("clear-chips").addEventListener("click", () =>
      this.setChips(clearChips()),
    );
    this.generateButton.addEventListener("click", () => {
      this.requests.push([...this.chips]);
      this.save();
      this.enqueue([...this.chips]);
    });
    this.reviewsInput.addEventListener("input", () => this.save());
    this.engineSelect.addEventListener("change", () => this.save());
    for (const button of document.querySelectorAll<HTMLButtonElement>("[data-tab]")) {
      button.addEventListener("click", () => this.showTab(button.dataset.tab ?? ""));
    }

    const saved = loadSession();
    if (saved) {
      this.reviewsInput.value = saved.reviews;
      this.engineSelect.value = saved.engine || this.engineSelect.value;
      this.setChips(saved.chips ?? []);
      this.requests = saved.requests ?? [];
      for (const control of this.requests) this.enqueue(control);
    } else {
      this.setChips([]);
    }

    this.client
      .health()
      .then((health) => {
        must("health").textContent =
          `${health.corpus} corpus · ${health.n_submissions} submissions · ` +
          `${health.kernel_backend} kernels · config ${health.config_hash}`;
      })
      .catch((err) => this.showError(err));
  }

  private save(): void {
    const session: SavedSession = {
      reviews: this.reviewsInput.value,
      engine: this.engineSelect.value,
      chips: this.chips,
      requests: this.requests,
    };
    try {
      sessionStorage.setItem(SESSION_KEY, JSON.stringify(session));
    } catch {
      // storage full or disabled; the console still works, just won't restore
    }
  }

  private setChips(chips: ChipSequence): void {
    this.chips = chips;
    this.composer.replaceChildren();
    chips.forEach((label, i) => {
      this.composer.appendChild(
        composerChip(label, () => this.setChips(removeChip(this.chips, i))),
      );
    });
    if (chips.length === 0) {
      this.composer.appendChild(
        el("span", "composer-empty", "add at least one category chip"),
      );
    }
    this.refreshControls();
    this.save();
  }

  private refreshControls(): void {
    this.generateButton.disabled = !canGenerate(this.chips) || this.pending > 0;
    this.status.textContent =
      this.pending > 0 ? `generating… (${this.pending} queued)` : "";
  }

  /** Generates run strictly one at a time; later clicks wait their turn. */
  private enqueue(control: ChipSequence): void {
    this.pending += 1;
    this.refreshControls();
    this.queue = this.queue
      .then(() => this.generate(control))
      .catch((err) => this.showError(err))
      .finally(() => {
        this.pending -= 1;
        this.refreshControls();
      });
  }

  private async generate(control: ChipSequence): Promise<void> {
    const reviews = parseReviews(this.reviewsInput.value);
    if (reviews.length === 0) {
      throw new ApiError("no_reviews", "paste at least one review first", 0);
    }
    const response = await this.client.generate({
      reviews,
      engine: this.engineSelect.value,
      combine: "concat",
      control,
    });
    this.errorBanner.textContent = "";
    this.drafts.push({
      ordinal: this.drafts.length + 1,
      requested: control,
      response,
    });
    this.renderDrafts();
  }

  private renderDrafts(): void {
    this.draftsPanel.replaceChildren();
    this.drafts.forEach((draft, i) => {
      const duplicate = this.drafts.slice(0, i).find((prior) => isDuplicateOf(prior, draft));
      const previous = i > 0 ? this.drafts[i - 1] : undefined;
      const flags: DraftFlags = {
        duplicateOf: duplicate ? duplicate.ordinal : null,
        diffAgainst: previous && !duplicate ? previous.response : null,
      };
      this.draftsPanel.appendChild(draftCard(draft, flags));
    });
  }

  private showTab(name: string): void {
    for (const panel of document.querySelectorAll<HTMLElement>("[data-panel]")) {
      panel.hidden = panel.dataset.panel !== name;
    }
    for (const button of document.querySelectorAll<HTMLButtonElement>("[data-tab]")) {
      button.classList.toggle("tab-active", button.dataset.tab === name);
    }
    if (name === "heatmap" && !this.heatmapLoaded) {
      this.heatmapLoaded = true;
      this.client
        .transition()
        .then((payload) => {
          must("heatmap-host").replaceChildren(heatmapTable(buildHeatmap(payload)));
        })
        .catch((err) => {
          this.heatmapLoaded = false;
          this.showError(err);
        });
    }
    if (name === "stats" && !this.statsLoaded) {
      this.statsLoaded = true;
      this.client
        .stats()
        .then((payload) => {
          must("stats-host").replaceChildren(statsSummary(payload));
        })
        .catch((err) => {
          this.statsLoaded = false;
          this.showError(err);
        });
    }
  }

  private showError(err: unknown): void {
    if (err instanceof ApiError) {
      this.errorBanner.textContent = `${err.code}: ${err.message}`;
    } else {
      this.errorBanner.textContent = String(err);
    }
  }
}

new Console().start();
