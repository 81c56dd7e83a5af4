#!/usr/bin/env python3
"""Convert published UGC-database metadata (CSV) into a #vqa-manifest v1 file.

The databases themselves cannot be redistributed, so this reads the metadata
sheet you downloaded from the publisher and emits a manifest whose uris point
at wherever you unpacked the clips. Known layouts ship as presets; anything
else works with explicit --*-col flags. Excel sheets must be exported to CSV
first.

    csv_to_manifest.py --database konvid-1k --csv KoNViD_1k_attributes.csv \
        --video-dir videos --out konvid.manifest
"""

import argparse
import csv
import sys

PRESETS = {
    # column names as published; filename template fills {id} from id_col
    "konvid-1k": {
        "id_col": "flickr_id", "mos_col": "MOS", "std_col": "SD",
        "file_template": "{id}.mp4",
    },
    "youtube-ugc": {
        "id_col": "vid", "mos_col": "MOS full", "std_col": "SD full",
        "file_template": "{id}.mkv",
    },
    "lsvq": {
        "id_col": "name", "mos_col": "mos", "std_col": None,
        "file_template": "{id}.mp4",
    },
    "lbvd": {
        "id_col": "video", "mos_col": "MOS", "std_col": "std",
        "file_template": "{id}",
    },
    "live-yt-gaming": {
        "id_col": "video", "mos_col": "MOS", "std_col": None,
        "file_template": "{id}",
    },
}

OPTIONAL_COLS = ("width", "height", "frames", "fps")


def build_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--csv", required=True, help="metadata sheet")
    p.add_argument("--out", required=True, help="manifest to write")
    p.add_argument("--database", choices=sorted(PRESETS), help="published layout preset")
    p.add_argument("--name", help="dataset name in the manifest (default: --database)")
    p.add_argument("--video-dir", default=".", help="uri prefix for the clips")
    p.add_argument("--id-col", help="column holding the video id/filename")
    p.add_argument("--mos-col", help="column holding the MOS")
    p.add_argument("--std-col", help="column holding the MOS std, if any")
    p.add_argument("--file-template", help="filename from id, e.g. '{id}.mp4'")
    p.add_argument("--mos-scale", type=float, default=1.0,
                   help="multiply MOS by this (e.g. 0.05 maps 0-100 onto 0-5)")
    return p


def main():
    args = build_args().parse_args()
    preset = dict(PRESETS.get(args.database, {}))
    for key in ("id_col", "mos_col", "std_col", "file_template"):
        flag = getattr(args, key)
        if flag is not None:
            preset[key] = flag
    missing = [k for k in ("id_col", "mos_col", "file_template") if not preset.get(k)]
    if missing:
        sys.exit("need --database or explicit flags for: " + ", ".join(missing))

    name = args.name or args.database or "converted"
    rows = []
    with open(args.csv, newline="", encoding="utf-8-sig") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        for col in (preset["id_col"], preset["mos_col"]):
            if col not in header:
                sys.exit(f"column '{col}' not in {args.csv} (have: {', '.join(header)})")
        std_col = preset.get("std_col")
        if std_col and std_col not in header:
            std_col = None
        for i, row in enumerate(reader, start=2):
            vid = row[preset["id_col"]].strip()
            if not vid:
                sys.exit(f"{args.csv}:{i}: empty id")
            try:
                mos = float(row[preset["mos_col"]]) * args.mos_scale
            except ValueError:
                sys.exit(f"{args.csv}:{i}: non-numeric MOS '{row[preset['mos_col']]}'")
            fields = {
                "uri": f"{args.video_dir.rstrip('/')}/{preset['file_template'].format(id=vid)}",
                "mos": f"{mos:g}",
            }
            if std_col and row[std_col].strip():
                fields["mos_std"] = f"{float(row[std_col]) * args.mos_scale:g}"
            for col in OPTIONAL_COLS:
                if col in header and row[col].strip():
                    fields[col] = row[col].strip()
            rows.append(fields)

    if not rows:
        sys.exit(f"{args.csv}: no records")
    seen = set()
    for r in rows:
        if r["uri"] in seen:
            sys.exit(f"duplicate uri after conversion: {r['uri']}")
        seen.add(r["uri"])

    with open(args.out, "w", encoding="utf-8") as f:
        f.write("#vqa-manifest v1\n")
        f.write(f"name={name}\n")
        for r in rows:
            f.write(" ".join(f"{k}={v}" for k, v in r.items()) + "\n")
    print(f"wrote {len(rows)} records to {args.out}")


if __name__ == "__main__":
    main()
