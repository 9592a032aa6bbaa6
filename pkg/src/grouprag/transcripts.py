"""Line-oriented transcript parsing.

Format, one turn header per line:

    [HH:MM:SS] Speaker: first line of the turn
    continuation lines without a header extend the current turn

The timestamp is optional ("Speaker: text" also starts a turn). Text before
the first header becomes a turn attributed to "unknown". Parsing is total:
no input raises.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

UNKNOWN_SPEAKER = "unknown"

# Speaker labels are short, colon-free and bracket-free; anything else is a
# continuation line.
_HEADER = re.compile(
    r"^(?:\[(\d{2}):(\d{2}):(\d{2})\]\s*)?([^:\[\]\n]{1,64}?)\s*:\s?(.*)$"
)


@dataclass(frozen=True)
class TranscriptTurn:
    speaker: str
    text: str
    start_time: int | None = None  # seconds from transcript start


def parse_transcript(raw: str) -> list[TranscriptTurn]:
    """Parse raw transcript text into ordered turns. Never raises."""
    turns: list[tuple[str, int | None, list[str]]] = []
    for line in raw.splitlines():
        m = _HEADER.match(line)
        if m:
            hh, mm, ss, speaker, first = m.groups()
            start = None
            if hh is not None:
                start = int(hh) * 3600 + int(mm) * 60 + int(ss)
            turns.append((speaker.strip(), start, [first]))
        elif turns:
            turns[-1][2].append(line)
        else:
            turns.append((UNKNOWN_SPEAKER, None, [line]))
    result = []
    for speaker, start, parts in turns:
        text = "\n".join(parts).strip()
        if text:
            result.append(TranscriptTurn(speaker=speaker, text=text, start_time=start))
    return result


def flatten_turns(turns: list[TranscriptTurn]) -> str:
    """Render turns as "Speaker: text" paragraphs, the canonical form that
    gets hashed and chunked. Keeping the speaker inline means retrieval
    surfaces who said what."""
    return "\n\n".join(f"{t.speaker}: {t.text}" for t in turns)
