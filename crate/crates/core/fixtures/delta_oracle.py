#!/usr/bin/env python3
# Copyright (c) 2026 The cprof Authors
#
# SPDX-License-Identifier: Apache-2.0
#

"""Reference delta computation for a recorded run, default rules only.

Usage: delta_oracle.py RUN_DIR TARGET_SECONDS > expected.csv

Written from the documented bucketing rules, not from the Rust code:
  * the nominal grid point j*target is claimed by the first sample whose
    elapsed time plus half an interval reaches it; a gap folds later grid
    points into that bucket; the final sample always closes a bucket
  * counters sum non-negative steps between consecutive present samples
  * gauges take the bucket-end value
  * vBytesWritten = vDiskSectorWrites * sectorSize, vMemoryUsed = total - free
"""

import json, os, re, sys

HOST_COUNTERS = ["vCpuTimeUserMode", "vCpuTimeKernelMode", "vCpuIdleTime", "vCpuTimeIOWait",
                 "vCpuContextSwitches", "vCpuNice", "vCpuSteal", "vDiskSectorReads",
                 "vDiskSectorWrites", "vDiskReadTime", "vDiskWriteTime", "vNetworkBytesRecvd",
                 "vNetworkBytesSent"]
HOST_GAUGES = ["vMemoryTotal", "vMemoryFree", "vMemoryBuffers", "vMemoryCached", "vLoadAvg"]
CONT_COUNTERS = ["cCpuTimeUserMode", "cCpuTimeKernelMode", "cDiskSectorIO", "cDiskReadBytes",
                 "cDiskWriteBytes", "cNetworkBytesRecvd", "cNetworkBytesSent"]
CONT_GAUGES = ["cMemoryUsed", "cNumProcesses"]
PROC_COUNTERS = ["pCpuTimeUserMode", "pCpuTimeKernelMode", "pVoluntaryContextSwitches",
                 "pNonvoluntaryContextSwitches", "pBlockIODelays"]
PROC_GAUGES = ["pResidentSetSize", "pNumThreads"]
ORDER = (HOST_COUNTERS[:13] + HOST_GAUGES + CONT_COUNTERS + CONT_GAUGES
         + PROC_COUNTERS + PROC_GAUGES)
COUNTERS = set(HOST_COUNTERS + CONT_COUNTERS + PROC_COUNTERS)


def load(run):
    meta = json.load(open(os.path.join(run, "run_metadata.json")))
    snaps = [json.load(open(os.path.join(run, f)))
             for f in os.listdir(run) if re.fullmatch(r"\d+\.json", f)]
    snaps.sort(key=lambda s: s["monotonicClock"])
    return meta, snaps


def value(snap, name):
    sec = {"v": snap.get("host"), "c": snap.get("container")}[name[0]]
    if not sec or name not in sec:
        return None
    v = sec[name]
    return v[0] if name == "vLoadAvg" else v


def buckets(monos, target, interval):
    """Indices of bucket-closing samples, by scanning the nominal grid."""
    ends, t0, half, j = [], monos[0], interval // 2, 1
    for i in range(1, len(monos)):
        e = monos[i] - t0 + half
        if e >= j * target:
            ends.append(i)
            while j * target <= e:
                j += 1
    if len(monos) > 1 and (not ends or ends[-1] != len(monos) - 1):
        ends.append(len(monos) - 1)
    return ends


def resolve(vals, ends, counter):
    out, start = [], 0
    for end in ends:
        if vals[end] is None:
            out.append(None)
        elif counter:
            present = [v for v in vals[start:end + 1] if v is not None]
            out.append(sum(max(b - a, 0) for a, b in zip(present, present[1:]))
                       if len(present) > 1 else None)
        else:
            out.append(vals[end])
        start = end
    return out


def fmt(v):
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return repr(v) if isinstance(v, float) else str(v)


def main():
    run, target_s = sys.argv[1], float(sys.argv[2])
    meta, snaps = load(run)
    interval = round(meta["intervalSeconds"] * 1e9)
    ends = buckets([s["monotonicClock"] for s in snaps], round(target_s * 1e9), interval)
    cols = []  # (label, cells)
    resolved = {}
    pids = sorted({p["pId"] for s in snaps for p in s.get("processes") or []})
    for name in ORDER:
        if name[0] == "p":
            for pid in pids:
                vals = []
                for s in snaps:
                    p = next((p for p in s.get("processes") or [] if p["pId"] == pid), None)
                    vals.append(p.get(name) if p else None)
                cols.append((f"{name}/{pid}", resolve(vals, ends, name in COUNTERS)))
            continue
        cells = resolve([value(s, name) for s in snaps], ends, name in COUNTERS)
        resolved[name] = cells
        cols.append((name, cells))
    sector = meta.get("sectorSizeBytes", 512)
    w, t, f = resolved["vDiskSectorWrites"], resolved["vMemoryTotal"], resolved["vMemoryFree"]
    cols.append(("vBytesWritten", [None if a is None else a * sector for a in w]))
    cols.append(("vMemoryUsed", [None if a is None or b is None else
                                 (a - b if a >= b else float(a - b)) for a, b in zip(t, f)]))
    cols = [c for c in cols if any(v is not None for v in c[1])]
    print("timestamp," + ",".join(c[0] for c in cols))
    for b, end in enumerate(ends):
        if all(c[1][b] is None for c in cols):
            continue
        row = [fmt(snaps[end]["wallClock"])] + ["" if c[1][b] is None else fmt(c[1][b]) for c in cols]
        print(",".join(row))


if __name__ == "__main__":
    main()
