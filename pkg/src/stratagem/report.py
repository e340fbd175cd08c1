"""Arena reporting: delimited game rows, a standings summary, and rendered
figures written next to the delimited output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .runner import Standings

CSV_HEADER = "pairing;seat0;seat1;seed;outcome;turns"


def games_csv(standings: Standings) -> str:
    lines = [CSV_HEADER]
    for g in standings.games:
        lines.append(f"{g.pairing};{g.seat0};{g.seat1};{g.seed};{g.outcome};{g.turns}")
    return "\n".join(lines) + "\n"


def standings_csv(standings: Standings) -> str:
    lines = ["agent;games;wins;draws;losses;win_rate;wilson_low;wilson_high"]
    for r in standings.rows:
        low, high = r.wilson
        lines.append(
            f"{r.agent};{r.games};{r.wins};{r.draws};{r.losses};{r.win_rate:.4f};{low:.4f};{high:.4f}"
        )
    return "\n".join(lines) + "\n"


def format_standings(standings: Standings) -> str:
    """Aligned text table with win rates and Wilson 95% intervals."""
    headers = ("agent", "games", "wins", "draws", "losses", "win_rate", "95% interval")
    rows = []
    for r in standings.rows:
        low, high = r.wilson
        rows.append(
            (r.agent, str(r.games), str(r.wins), str(r.draws), str(r.losses), f"{r.win_rate:.3f}", f"[{low:.3f}, {high:.3f}]")
        )
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h) for i, h in enumerate(headers)]
    out = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    for row in rows:
        out.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(out)


def write_reports(standings: Standings, csv_path: str | Path, figures: bool = True) -> list[Path]:
    """Write the per-game CSV plus the standings summary, and render the
    standings/game-length figures alongside. Returns the written paths."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    written = [csv_path]
    csv_path.write_text(games_csv(standings), encoding="utf-8")
    summary_path = csv_path.with_name(csv_path.stem + "_standings.csv")
    summary_path.write_text(standings_csv(standings), encoding="utf-8")
    written.append(summary_path)
    if figures:
        written.extend(render_figures(standings, csv_path))
    return written


def render_figures(standings: Standings, csv_path: Path) -> list[Path]:
    paths = []
    agents = [r.agent for r in standings.rows]
    rates = [r.win_rate for r in standings.rows]
    errs_low = [max(0.0, r.win_rate - r.wilson[0]) for r in standings.rows]
    errs_high = [max(0.0, r.wilson[1] - r.win_rate) for r in standings.rows]

    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(agents) + 2), 3.5))
    ax.bar(range(len(agents)), rates, color="#4878a8", yerr=[errs_low, errs_high], capsize=4)
    ax.set_xticks(range(len(agents)))
    ax.set_xticklabels(agents, rotation=20, ha="right")
    ax.set_ylim(0, 1)
    ax.set_ylabel("win rate")
    ax.set_title("Arena standings (Wilson 95%)")
    fig.tight_layout()
    standings_png = csv_path.with_name(csv_path.stem + "_standings.png")
    fig.savefig(standings_png, dpi=120)
    plt.close(fig)
    paths.append(standings_png)

    turns = [g.turns for g in standings.games]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if turns:
        ax.hist(turns, bins=range(min(turns), max(turns) + 2), color="#6aa84f", edgecolor="black")
    ax.set_xlabel("game length (rounds)")
    ax.set_ylabel("games")
    ax.set_title("Game lengths")
    fig.tight_layout()
    turns_png = csv_path.with_name(csv_path.stem + "_turns.png")
    fig.savefig(turns_png, dpi=120)
    plt.close(fig)
    paths.append(turns_png)
    return paths
