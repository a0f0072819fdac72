#!/usr/bin/env python3
"""Convert MATPOWER .m case files into the line-oriented .case format used
by this project.

Requires the `matpower` PyPI package (data files only, no Octave needed):

    pip install matpower
    python3 scripts/convert_matpower.py fixtures/

Bus ids are renumbered to be contiguous 1..N in file order. Out-of-service
and zero-reactance branches are dropped. Generator cost rates are taken from
the linear coefficient of the MATPOWER gencost table.
"""
import re
import sys
import os


def parse_matrix(txt, key):
    m = re.search(r"mpc\.%s\s*=\s*\[(.*?)\];" % key, txt, re.S)
    if not m:
        return []
    rows = []
    for line in m.group(1).strip().splitlines():
        line = line.split("%")[0].strip().rstrip(";")
        if line:
            rows.append([float(v) for v in line.split()])
    return rows


def convert(src, name, out_dir):
    txt = open(src).read()
    bus = parse_matrix(txt, "bus")
    branch = parse_matrix(txt, "branch")
    gen = parse_matrix(txt, "gen")
    gencost = parse_matrix(txt, "gencost")

    remap = {int(b[0]): i + 1 for i, b in enumerate(bus)}
    lines = ["# %s (converted from MATPOWER %s)" % (name, os.path.basename(src))]
    lines.append("BUS")
    lines.append("# id  load_MW")
    for i, b in enumerate(bus):
        lines.append("%d %g" % (i + 1, b[2]))
    lines.append("BRANCH")
    lines.append("# from to kind value fmax_MW   (kind: x = reactance pu, b = susceptance pu)")
    dropped = 0
    for b in branch:
        if int(b[10]) == 0 or b[3] == 0.0:
            dropped += 1
            continue
        lines.append("%d %d x %.10g %g" % (remap[int(b[0])], remap[int(b[1])], b[3], b[5]))
    lines.append("GEN")
    lines.append("# bus pmax_MW cost_rate_per_MWh")
    for i, g in enumerate(gen):
        mu = 0.0
        if i < len(gencost):
            c = gencost[i]
            if c[0] == 2:  # polynomial model: last-but-one coefficient is linear
                ncoef = int(c[3])
                if ncoef >= 2:
                    mu = c[4 + ncoef - 2]
        lines.append("%d %g %g" % (remap[int(g[0])], g[8], mu))
    out = os.path.join(out_dir, name + ".case")
    open(out, "w").write("\n".join(lines) + "\n")
    print("wrote %s (%d buses, %d branches, %d dropped)" % (out, len(bus), len(branch) - dropped, dropped))


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "fixtures"
    import matpower
    data = matpower.path_matpower + "/data/"
    for case, name in [("case14", "ieee14"), ("case30", "ieee30"), ("case57", "ieee57"),
                       ("case118", "ieee118"), ("case145", "ieee145")]:
        convert(data + case + ".m", name, out_dir)


if __name__ == "__main__":
    main()
