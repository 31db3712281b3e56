import random
import time

import pytest

from procsec.event_log import EventKind, KeystrokeEvent, Session
from procsec.learner import gbm

K = EventKind

# every GbmModel built by fit_gbm during the run, for the loss-monotonicity guard
FITTED: list = []

SUITE_START = time.perf_counter()

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: dict = {}


def record_acceptance(n: int, name: str, ok: bool, detail: str) -> bool:
    ACCEPTANCE[n] = f"ACCEPTANCE {n} {name}: {'PASS' if ok else 'FAIL'} {detail}"
    return ok


def pytest_collection_modifyitems(items):
    # acceptance runs last so the suite-wide checks see every other test
    items.sort(key=lambda it: "test_acceptance.py" in it.nodeid)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])


@pytest.fixture(autouse=True)
def _monotone_loss_guard(monkeypatch):
    """Fail any test whose fits produce a training loss that ever goes up."""
    orig = gbm.GbmModel
    mine = []

    def recording(*args, **kwargs):
        m = orig(*args, **kwargs)
        mine.append(m)
        FITTED.append(m)
        return m

    monkeypatch.setattr(gbm, "GbmModel", recording)
    yield
    for m in mine:
        losses = m.train_loss
        assert all(b <= a for a, b in zip(losses, losses[1:])), "training loss increased"


def make_session(rows, sid="s1", wid="w1", task=""):
    """rows: (t_ms, kind, payload, pos[, cut_len])"""
    evs = []
    for r in rows:
        t, kind, payload, pos = r[:4]
        cut = r[4] if len(r) > 4 else 0
        evs.append(KeystrokeEvent(t, K(kind), payload, pos, cut))
    return Session(sid, wid, task, tuple(evs))


def random_session(rng: random.Random, n_events: int = 40, sid="f", wid="w") -> Session:
    """A valid session mixing every event kind, with strictly increasing times."""
    doc_len = 0
    t = rng.randrange(0, 5000)
    evs = []
    letters = "abcdefghij  ,."
    for _ in range(n_events):
        t += rng.randrange(1, 900)
        r = rng.random()
        if doc_len == 0 or r < 0.55:
            evs.append(KeystrokeEvent(t, K.INSERT, rng.choice(letters), doc_len))
            doc_len += 1
        elif r < 0.7:
            evs.append(KeystrokeEvent(t, K.BACKSPACE, "", doc_len))
            doc_len -= 1
        elif r < 0.8:
            p = "".join(rng.choice(letters) for _ in range(rng.randint(1, 5)))
            pos = rng.randint(0, doc_len)
            evs.append(KeystrokeEvent(t, K.PASTE, p, pos))
            doc_len += len(p)
        elif r < 0.9:
            pos = rng.randint(0, doc_len)
            evs.append(KeystrokeEvent(t, K.JUMP_INSERT, rng.choice(letters), pos))
            doc_len += 1
        else:
            pos = rng.randint(0, doc_len - 1)
            n = rng.randint(0, doc_len - pos)
            evs.append(KeystrokeEvent(t, K.CUT, "", pos, n))
            doc_len -= n
    return Session(sid, wid, "", tuple(evs))


# Twenty events typing "the cat sat." with a typo, a deleted word, a paste and a jump.
TWENTY = [
    (1000, "Insert", "t", 0),
    (1120, "Insert", "h", 1),
    (1250, "Insert", "e", 2),
    (1400, "Insert", " ", 3),
    (1700, "Insert", "c", 4),
    (1800, "Insert", "a", 5),
    (1900, "Insert", "r", 6),
    (2300, "Backspace", "", 7),
    (2450, "Insert", "t", 6),
    (2600, "Insert", " ", 7),
    (3500, "Insert", "s", 8),
    (3610, "Insert", "a", 9),
    (3700, "Insert", "t", 10),
    (4000, "Backspace", "", 11),
    (4100, "Backspace", "", 10),
    (4250, "Backspace", "", 9),
    (4500, "Paste", "sat", 8),
    (4700, "Insert", ".", 11),
    (5300, "JumpInsert", "x", 0),
    (5420, "Insert", " ", 13),
]


@pytest.fixture
def twenty():
    return make_session(TWENTY)
