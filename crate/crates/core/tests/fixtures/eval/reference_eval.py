"""Independent reference evaluation of the fixture. Reads the label and
prediction files as text, scores them with shapely polygon overlap and
writes expected_report.json plus the expected text tables."""

import json
import math
from pathlib import Path

from shapely.geometry import Polygon

METHOD = "fixture"
AP_THRESHOLDS = [0.7]
RECALL_THRESHOLDS = [0.3, 0.5]
# (min 2D height, max occlusion, max truncation)
LEVELS = {"easy": (40.0, 0, 0.15), "moderate": (25.0, 1, 0.30), "hard": (25.0, 2, 0.50)}
FOOTNOTE = (
    "RoI and RCNN both report recall of the final predictions; "
    "proposal-stage recall is not observable in result files."
)


def parse(path):
    records = []
    for text in path.read_text().splitlines():
        f = text.split()
        if not f:
            continue
        records.append(
            {
                "cls": f[0],
                "trunc": float(f[1]),
                "occ": int(f[2]),
                "alpha": float(f[3]),
                "bbox": [float(v) for v in f[4:8]],
                "dims": [float(v) for v in f[8:11]],
                "loc": [float(v) for v in f[11:14]],
                "ry": float(f[14]),
                "score": float(f[15]) if len(f) > 15 else None,
            }
        )
    return records


def footprint(r):
    x, _, z = r["loc"]
    _, w, l = r["dims"]
    c, s = math.cos(r["ry"]), math.sin(r["ry"])
    return Polygon(
        [
            (x + c * dx + s * dz, z - s * dx + c * dz)
            for dx, dz in ((l / 2, w / 2), (l / 2, -w / 2), (-l / 2, -w / 2), (-l / 2, w / 2))
        ]
    )


def iou3d(a, b):
    inter = footprint(a).intersection(footprint(b)).area
    ha, hb = a["dims"][0], b["dims"][0]
    overlap_h = max(0.0, min(a["loc"][1], b["loc"][1]) - max(a["loc"][1] - ha, b["loc"][1] - hb))
    vol = inter * overlap_h
    return vol / (ha * a["dims"][1] * a["dims"][2] + hb * b["dims"][1] * b["dims"][2] - vol)


def height(r):
    return r["bbox"][3] - r["bbox"][1]


def admits(level, r):
    if level == "overall":
        return True
    min_h, max_occ, max_trunc = LEVELS[level]
    return height(r) >= min_h and 0 <= r["occ"] <= max_occ and 0.0 <= r["trunc"] <= max_trunc


def order_key(p):
    return (-p["score"], *p["loc"], *p["dims"], p["ry"], p["alpha"], *p["bbox"], p["trunc"])


def match(gts, preds, level, thr):
    """Returns (list of (score, is_tp) for counted predictions, valid gt count, tp)."""
    gts = [g for g in gts if min(g["dims"]) > 0]
    valid = [g["cls"] == "Car" and admits(level, g) for g in gts]
    preds = sorted((p for p in preds if p["cls"] == "Car"), key=order_key)
    taken = [False] * len(gts)
    counted = []
    min_h = LEVELS[level][0] if level in LEVELS else 0.0
    for p in preds:
        best = {True: None, False: None}
        for i, g in enumerate(gts):
            if taken[i]:
                continue
            o = iou3d(p, g)
            if o >= thr and (best[valid[i]] is None or o > best[valid[i]][1]):
                best[valid[i]] = (i, o)
        if best[True] is not None:
            taken[best[True][0]] = True
            counted.append((p["score"], True))
        elif best[False] is not None:
            taken[best[False][0]] = True
        elif height(p) >= min_h:
            counted.append((p["score"], False))
    tp = sum(1 for _, t in counted if t)
    return counted, sum(valid), tp


def average_precision(counted, n_gt, levels):
    counted = sorted(counted, key=lambda c: -c[0])
    points = []
    tp = fp = 0
    for i, (score, is_tp) in enumerate(counted):
        tp += is_tp
        fp += not is_tp
        if i + 1 < len(counted) and counted[i + 1][0] == score:
            continue
        points.append((tp / n_gt, tp / (tp + fp)))

    def interp(r):
        return max((p for rec, p in points if rec >= r), default=0.0)

    return 100.0 * sum(interp(r) for r in levels) / len(levels)


def grid(groups, rows):
    stub = max([len("Method")] + [len(name) for name, _ in rows])
    widths = []
    col = 0
    for title, columns in groups:
        w = [max([len(c)] + [len(cells[col + i]) for _, cells in rows]) for i, c in enumerate(columns)]
        span = sum(w) + 3 * (len(w) - 1)
        if len(title) > span:
            w[-1] += len(title) - span
        widths.append(w)
        col += len(w)

    def rule(fill, inner):
        return "+" + fill * (stub + 2) + "+" + "".join(inner.join(fill * (n + 2) for n in w) + "+" for w in widths)

    lines = [rule("-", "-")]
    lines.append(
        "| " + " " * stub + " |"
        + "".join(f" {title:^{sum(w) + 3 * (len(w) - 1)}} |" for (title, _), w in zip(groups, widths))
    )
    lines.append("| " + "Method".ljust(stub) + " +" + "".join("+".join("-" * (n + 2) for n in w) + "+" for w in widths))
    lines.append(
        "| " + " " * stub + " |"
        + "".join(f" {c:^{n}} |" for (_, cs), w in zip(groups, widths) for c, n in zip(cs, w))
    )
    lines.append(rule("=", "+"))
    for name, cells in rows:
        it = iter(cells)
        lines.append("| " + name.ljust(stub) + " |" + "".join(f" {next(it):>{n}} |" for w in widths for n in w))
        lines.append(rule("-", "+"))
    return "\n".join(lines) + "\n"


def main():
    root = Path("dataset")
    frames = sorted(
        line
        for split in ("test", "val")
        for line in (root / "ImageSets" / f"{split}.txt").read_text().split()
    )
    gt = {f: parse(root / "label_2" / f"{f}.txt") for f in frames}
    preds = {f: parse(p) if (p := Path("predictions") / f"{f}.txt").exists() else [] for f in frames}

    ap = []
    for thr in AP_THRESHOLDS:
        for level in LEVELS:
            counted, n_gt, tp = [], 0, 0
            for f in frames:
                c, n, t = match(gt[f], preds[f], level, thr)
                counted += c
                n_gt += n
                tp += t
            fp = len(counted) - tp
            ap.append(
                {
                    "difficulty": level,
                    "iou_threshold": thr,
                    "gt_count": n_gt,
                    "tp": tp,
                    "fp": fp,
                    "fn": n_gt - tp,
                    "ap11": average_precision(counted, n_gt, [k / 10 for k in range(11)]) if n_gt else None,
                    "ap40": average_precision(counted, n_gt, [k / 40 for k in range(1, 41)]) if n_gt else None,
                }
            )
    recall = []
    for level in ["overall", *LEVELS]:
        for thr in RECALL_THRESHOLDS:
            n_gt = tp = 0
            for f in frames:
                _, n, t = match(gt[f], preds[f], level, thr)
                n_gt += n
                tp += t
            recall.append(
                {
                    "bucket": level,
                    "iou_threshold": thr,
                    "gt_count": n_gt,
                    "tp": tp,
                    "fn": n_gt - tp,
                    "recall": tp / n_gt if n_gt else None,
                }
            )
    Path("expected_report.json").write_text(json.dumps({"ap": ap, "recall": recall}, indent=2) + "\n")

    def cell(v):
        return "n/a" if v is None else f"{v:.4f}"

    def find_ap(level, thr):
        return next(e for e in ap if e["difficulty"] == level and e["iou_threshold"] == thr)

    groups, cells = [], []
    for kind in ("ap11", "ap40"):
        for thr in AP_THRESHOLDS:
            groups.append((f"{kind.upper()}, (IoU={thr:.2f})", [l.capitalize() for l in LEVELS]))
            cells += [cell(find_ap(l, thr)[kind]) for l in LEVELS]
    Path("expected_ap_table.txt").write_text(
        "Average precision, 3D box overlap\n" + grid(groups, [(METHOD, cells)])
    )

    groups, cells = [], []
    for thr in RECALL_THRESHOLDS:
        groups.append((f"Recall, (IoU={thr:.2f})", ["RoI", "RCNN"]))
        v = next(e for e in recall if e["bucket"] == "overall" and e["iou_threshold"] == thr)["recall"]
        cells += [cell(v), cell(v)]
    Path("expected_recall_table.txt").write_text(
        "Recall, 3D box overlap\n" + grid(groups, [(METHOD, cells)]) + FOOTNOTE + "\n"
    )


if __name__ == "__main__":
    main()
