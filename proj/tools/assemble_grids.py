#!/usr/bin/env python3
"""Writes data/ieee34.grid and data/cigre_mv.grid from public positive-sequence data.

Run from the repository root: python3 tools/assemble_grids.py
Every assembly choice is repeated as a comment in the generated files.
"""
import math
import pathlib

MI_KM = 1.609344
FT_KM = 0.0003048

# IEEE 34-node feeder, line configurations in ohm/mile and uS/mile (60 Hz).
# Positive sequence = mean(self) - mean(mutual) of the phase matrices.
def pos_seq(r_self, x_self, r_mut, x_mut, b_self, b_mut):
    m = lambda v: sum(v) / len(v)
    return m(r_self) - m(r_mut), m(x_self) - m(x_mut), m(b_self) - m(b_mut)

CFG = {
    300: pos_seq([1.3368, 1.3238, 1.3294], [1.3343, 1.3569, 1.3471], [0.2101, 0.2130, 0.2066],
                 [0.5779, 0.5015, 0.4591], [5.3350, 5.0979, 4.8880], [-1.5313, -0.9943, -0.6212]),
    301: pos_seq([1.9300, 1.9157, 1.9219], [1.4115, 1.4281, 1.4209], [0.2327, 0.2359, 0.2288],
                 [0.6442, 0.5691, 0.5238], [5.1207, 4.9055, 4.7154], [-1.4364, -0.9402, -0.5951]),
}
# single-phase laterals (302, 303, 304) are modelled with the 301 positive sequence
for c in (302, 303, 304):
    CFG[c] = CFG[301]

SEGMENTS = [  # (from, to, feet, config)
    (800, 802, 2580, 300), (802, 806, 1730, 300), (806, 808, 32230, 300), (808, 810, 5804, 303),
    (808, 812, 37500, 300), (812, 814, 29730, 300), (814, 850, 10, 301), (816, 818, 1710, 302),
    (816, 824, 10210, 301), (818, 820, 48150, 302), (820, 822, 13740, 302), (824, 826, 3030, 303),
    (824, 828, 840, 301), (828, 830, 20440, 301), (830, 854, 520, 301), (832, 858, 4900, 301),
    (834, 860, 2020, 301), (834, 842, 280, 301), (836, 840, 860, 301), (836, 862, 280, 301),
    (842, 844, 1350, 301), (844, 846, 3640, 301), (846, 848, 530, 301), (850, 816, 310, 301),
    (852, 832, 10, 301), (854, 856, 23330, 303), (854, 852, 36830, 301), (858, 864, 1620, 303),
    (858, 834, 5830, 301), (860, 836, 2680, 301), (862, 838, 4860, 304),
]
SPOT = {860: (60, 48), 840: (27, 21), 844: (405, 315), 848: (60, 48), 890: (450, 225), 830: (45, 20)}
DISTRIBUTED = [  # kW, kvar summed over phases, split evenly between both ends
    (802, 806, 55, 29), (808, 810, 16, 8), (818, 820, 34, 17), (820, 822, 135, 70), (816, 824, 5, 2),
    (824, 826, 40, 20), (824, 828, 4, 2), (828, 830, 7, 3), (854, 856, 4, 2), (832, 858, 15, 7),
    (858, 864, 2, 1), (858, 834, 32, 17), (834, 860, 146, 73), (860, 836, 82, 43), (836, 840, 40, 20),
    (862, 838, 28, 14), (842, 844, 9, 5), (844, 846, 45, 23), (846, 848, 23, 11),
]
CAPS = {844: 300, 848: 450}  # kvar


def ieee34():
    s_base, f = 5e6, 60.0
    w = 2 * math.pi * f
    out = []
    out.append("# IEEE 34-node test feeder, balanced positive-sequence model.")
    out.append("# Assembled by tools/assemble_grids.py from the public feeder data:")
    out.append("#  - configurations 300/301 reduced to positive sequence (mean self - mean mutual);")
    out.append("#    single-phase laterals 302/303/304 use the 301 values;")
    out.append("#  - the 832-888 in-line transformer is removed and the spot load of 890 is")
    out.append("#    lumped at 832 (the 4.16 kV section is not modelled);")
    out.append("#  - voltage regulators are ignored, slack at 800 with |V| = 1;")
    out.append("#  - distributed loads are split evenly between both ends of their segment;")
    out.append("#  - shunt capacitors at 844 and 848 enter as constant negative q;")
    out.append("#  - reactances and susceptances are the 60 Hz values, hence f_base = 60;")
    out.append("#  - every line is rated 104.34 A.")
    out.append("name = ieee34")
    out.append("")
    out.append("[base]\ns_base = 5e6\nv_base = 24.9e3\nf_base = 60")
    out.append("")
    out.append("[grid]\nslack = 800\nv0 = 1.0\nv_min = 0.9025\nv_max = 1.1025")
    out.append("")
    out.append("# Injection growth for the sweeps: production proportional to load share.")
    out.append("[bench]\nsweep_rule = load_share\npmax_rule = pct110\nsweep_k_min = 0\nsweep_k_max = 6")
    out.append("compress_k_min = 0\ncompress_k_max = 8")
    load = {}
    for n, (p, q) in SPOT.items():
        n = 832 if n == 890 else n
        lp, lq = load.get(n, (0.0, 0.0))
        load[n] = (lp + p, lq + q)
    for a, b, p, q in DISTRIBUTED:
        for n in (a, b):
            lp, lq = load.get(n, (0.0, 0.0))
            load[n] = (lp + p / 2, lq + q / 2)
    for a, b, ft, c in SEGMENTS:
        r, x, bs = CFG[c]
        out.append("")
        out.append(f"[line {b}]  # config {c}, {ft} ft")
        out.append(f"up = {a}")
        out.append(f"length_km = {ft * FT_KM!r}")
        out.append(f"r_ohm_per_km = {r / MI_KM!r}")
        out.append(f"l_mh_per_km = {x / MI_KM / w * 1e3!r}")
        out.append(f"c_uf_per_km = {bs / MI_KM / w!r}")
        out.append("i_max_a = 104.34")
    for n in sorted(set(load) | set(CAPS)):
        p, q = load.get(n, (0.0, 0.0))
        q -= CAPS.get(n, 0.0)
        out.append("")
        out.append(f"[bus {n}]  # {p:g} kW, {q:g} kvar" + (" incl. capacitor" if n in CAPS else ""))
        out.append(f"p = {p * 1e3 / s_base!r}")
        out.append(f"q = {q * 1e3 / s_base!r}")
    return "\n".join(out) + "\n"


# CIGRE European MV benchmark, feeder 1 with switches S1-S3 open.
CABLE = (0.501, 0.716, 151.1749e-9)  # ohm/km, ohm/km at 50 Hz, F/km
CIGRE_SEG = [(1, 2, 2.82), (2, 3, 4.42), (3, 4, 0.61), (4, 5, 0.56), (5, 6, 1.54), (3, 8, 1.30),
             (8, 7, 1.67), (8, 9, 0.32), (9, 10, 0.77), (10, 11, 0.33)]
RESIDENTIAL = {1: (14.994, 3.044662), 3: (0.27645, 0.069285), 4: (0.43165, 0.108182), 5: (0.7275, 0.182329),
               6: (0.54805, 0.137354), 8: (0.58685, 0.147078), 10: (0.4753, 0.119121), 11: (0.3298, 0.082656)}
COMMERCIAL = {1: (4.845, 1.592474), 3: (0.22525, 0.139597), 7: (0.0765, 0.04741), 9: (0.57375, 0.355578),
              10: (0.068, 0.042143)}
DG = {3: 0.02, 4: 0.02, 5: 0.03 + 0.033 + 0.6, 6: 0.03, 7: 1.5, 8: 0.03, 9: 0.03 + 0.31 + 0.212,
      10: 0.04 + 0.014 + 0.2, 11: 0.01}  # MW, PV + wind + CHP/fuel cell ratings


def cigre():
    s_base, f = 25e6, 50.0
    w = 2 * math.pi * f
    out = []
    out.append("# CIGRE European MV distribution benchmark (feeder 1, switches open), positive sequence.")
    out.append("# Assembled by tools/assemble_grids.py:")
    out.append("#  - the 110/20 kV transformer (25 MVA, uk = 12.00724 %, ukr = 0.16 %) is line 1,")
    out.append("#    a series-only element; the HV grid behind it is the slack at 1.03 p.u.;")
    out.append("#  - the residential and commercial loads of bus 1 stay on bus 1;")
    out.append("#  - cables use R = 0.501 ohm/km, X = 0.716 ohm/km, C = 151.1749 nF/km;")
    out.append("#  - p_max is the load, p_min = load - DG rating (3.079 MW in total);")
    out.append("#  - the transformer is rated 974.2786 A, cables 145 A (ampacity not published).")
    out.append("name = cigre_mv")
    out.append("")
    out.append("[base]\ns_base = 25e6\nv_base = 20e3\nf_base = 50")
    out.append("")
    out.append("[grid]\nslack = 0\nv0 = 1.0609\nv_min = 0.9025\nv_max = 1.1025")
    out.append("")
    out.append("# Injection growth: every DG unit at k times its rating. Flow caps from a load flow,")
    out.append("# the 110 % load rule leaves no room for the transformer's reactive losses.")
    out.append("[bench]\nsweep_rule = capability\npmax_rule = loadflow\nsweep_k_min = 0\nsweep_k_max = 10")
    out.append("compress_k_min = 1\ncompress_k_max = 40")
    vk, vkr = 0.1200724, 0.0016
    xt = math.sqrt(vk * vk - vkr * vkr)
    out.append("")
    out.append("[line 1]  # transformer")
    out.append("up = 0")
    out.append(f"r = {vkr!r}")
    out.append(f"x = {xt!r}")
    out.append("b = 0")
    out.append("shunt = none")
    out.append("i_max_a = 974.2786")
    for a, b, km in CIGRE_SEG:
        R, X, C = CABLE
        out.append("")
        out.append(f"[line {b}]")
        out.append(f"up = {a}")
        out.append(f"length_km = {km!r}")
        out.append(f"r_ohm_per_km = {R!r}")
        out.append(f"l_mh_per_km = {X / w * 1e3!r}")
        out.append(f"c_uf_per_km = {C * 1e6!r}")
        out.append("i_max_a = 145")
    for n in range(1, 12):
        p = RESIDENTIAL.get(n, (0, 0))[0] + COMMERCIAL.get(n, (0, 0))[0]
        q = RESIDENTIAL.get(n, (0, 0))[1] + COMMERCIAL.get(n, (0, 0))[1]
        dg = DG.get(n, 0.0)
        out.append("")
        out.append(f"[bus {n}]  # {p:g} MW, {q:g} Mvar, DG {dg:g} MW")
        out.append(f"p_max = {p * 1e6 / s_base!r}")
        out.append(f"p_min = {(p - dg) * 1e6 / s_base!r}")
        out.append(f"q = {q * 1e6 / s_base!r}")
    return "\n".join(out) + "\n"


if __name__ == "__main__":
    root = pathlib.Path(__file__).resolve().parent.parent / "data"
    root.mkdir(exist_ok=True)
    (root / "ieee34.grid").write_text(ieee34())
    (root / "cigre_mv.grid").write_text(cigre())
