"""Certify a system the toolkit cannot simulate.

Everything downstream of sampling only needs output traces, so any process
that logs a symbol per step can be certified: write the traces to the CSV
interchange format, load them back, and run abstraction + certification.
Here the "unknown" system is a noisy-start tent map simulated outside the
library, standing in for lab data.
"""

import numpy as np

from lcomplete import build_slca, certify, domino_complete, is_non_blocking
from lcomplete.core import load_traces_csv, save_traces_csv, traces_from_csv

N = 2_000
H = 6
L = 2


def simulate_external(seed: int) -> str:
    """Pretend this runs in someone else's lab: returns trace CSV text."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(N):
        x = rng.random()
        labels = []
        for _ in range(H):
            labels.append("lo" if x < 0.5 else "hi")
            x = 2 * x if x < 0.5 else 2 - 2 * x  # tent map
        rows.append(",".join(labels))
    header = "# alphabet: lo,hi\n# H: {}\n# system: tent-map-lab-data\n".format(H)
    return header + "\n".join(rows) + "\n"


def main() -> None:
    csv_text = simulate_external(seed=3)
    with open("external_traces.csv", "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    print("wrote external_traces.csv (the only interface to the black box)")

    traces = load_traces_csv("external_traces.csv")
    print(f"loaded {len(traces)} traces over alphabet {traces.alphabet.symbols}")

    slca = domino_complete(build_slca(traces, L))
    print(f"automaton: {len(slca.states)} states, {slca.n_edges} edges, "
          f"non-blocking: {is_non_blocking(slca)}")

    cert = certify(traces, L, beta=1e-9)
    print(f"certificate: s* = {cert.s_star}, eps = {cert.epsilon:.3e}")
    print("with confidence 1 - 1e-9, a fresh run shows an unwitnessed")
    print(f"2-window within {H} steps with probability <= eps.")

    # round trip: the CSV written by the library is bit-compatible
    save_traces_csv(traces, "external_traces_roundtrip.csv")
    again = traces_from_csv(open("external_traces_roundtrip.csv").read())
    assert [t.symbols for t in again] == [t.symbols for t in traces]
    print("CSV round trip verified")


if __name__ == "__main__":
    main()
