import pytest

_ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}
_TITLES: dict[str, str] = {}


class AcceptanceRecorder:
    def __call__(self, number: int, title: str, ok: bool, detail: str) -> bool:
        key = f"{number:02d}"
        _TITLES[key] = title
        _ACCEPTANCE.setdefault(key, []).append((bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}")
        return bool(ok)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[key]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {int(key)}: {_TITLES[key]} | {detail}")
