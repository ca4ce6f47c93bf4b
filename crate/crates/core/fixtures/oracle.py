#!/usr/bin/env python3
# Copyright (c) 2026 The cprof Authors
#
# SPDX-License-Identifier: Apache-2.0
#
"""Reference decoder for the fixture scenarios.

Writes scenarios/<name>/expected.json from the raw source files using plain
column splitting, independently of the Rust parsers. Run from this
directory after editing any scenario:

    python3 oracle.py
"""

import json
import os
import re
import sys

U64_MAX = 2**64 - 1
HERE = os.path.dirname(os.path.abspath(__file__))


class Bad(Exception):
    pass


def u64(tok):
    if not re.fullmatch(r"[0-9]+", tok) or int(tok) > U64_MAX:
        raise Bad(tok)
    return int(tok)


def proc_stat(text):
    cpu = ctxt = None
    for line in text.splitlines():
        cols = line.split()
        if not cols:
            continue
        if cols[0] == "cpu" and cpu is None:
            if len(cols) < 9:
                raise Bad("short cpu line")
            cpu = [u64(c) for c in cols[1:9]]
        elif cols[0] == "ctxt" and ctxt is None:
            if len(cols) < 2:
                raise Bad("empty ctxt")
            ctxt = u64(cols[1])
    if cpu is None or ctxt is None:
        raise Bad("missing line")
    keys = ["user", "nice", "system", "idle", "iowait", "irq", "softirq", "steal"]
    rec = dict(zip(keys, cpu))
    rec["context_switches"] = ctxt
    return rec


def whole_device(name):
    if re.fullmatch(r"(loop|ram|zram|dm-|md|sr)[0-9]+", name):
        return False
    if re.fullmatch(r"(sd|vd|hd|xvd)[a-z]+[0-9]+", name):
        return False
    if re.fullmatch(r"(nvme[0-9]+n[0-9]+|mmcblk[0-9]+)p[0-9]+", name):
        return False
    return True


def diskstats(text):
    out = []
    for line in text.splitlines():
        c = line.split()
        if not c:
            continue
        if len(c) < 14:
            raise Bad("short row")
        # 1-based columns 6, 10, 7, 11
        rec = {
            "device": c[2],
            "sectors_read": u64(c[5]),
            "sectors_written": u64(c[9]),
            "read_time_ms": u64(c[6]),
            "write_time_ms": u64(c[10]),
        }
        if whole_device(c[2]):
            out.append(rec)
    return out


def net_dev(text, exclude_lo=True):
    lines = text.splitlines()
    h1 = lines[0] if len(lines) > 0 else ""
    h2 = lines[1] if len(lines) > 1 else ""
    if "|" not in h1 or "|" not in h2 or "bytes" not in h2:
        raise Bad("header")
    out = []
    for line in lines[2:]:
        if not line.strip():
            continue
        if ":" not in line:
            raise Bad("no colon")
        name, rest = line.split(":", 1)
        name = name.strip()
        c = rest.split()
        if not name or len(c) < 9:
            raise Bad("truncated")
        rx, tx = u64(c[0]), u64(c[8])
        if exclude_lo and name == "lo":
            continue
        out.append({"interface": name, "bytes_recvd": rx, "bytes_sent": tx})
    return out


def meminfo(text):
    vals = {}
    for line in text.splitlines():
        if ":" not in line:
            continue
        k, v = line.split(":", 1)
        k = k.strip()
        if k in ("MemTotal", "MemFree", "Buffers", "Cached") and k not in vals:
            toks = v.split()
            if not toks:
                raise Bad("no value")
            vals[k] = u64(toks[0])
    if "MemTotal" not in vals or "MemFree" not in vals:
        raise Bad("missing")
    if vals["MemFree"] > vals["MemTotal"]:
        raise Bad("free > total")
    return {
        "total": vals["MemTotal"],
        "free": vals["MemFree"],
        "buffers": vals.get("Buffers"),
        "cached": vals.get("Cached"),
    }


def loadavg(text):
    toks = text.split()
    if len(toks) < 3:
        raise Bad("short")
    out = []
    for t in toks[:3]:
        if not re.fullmatch(r"[0-9]+(\.[0-9]+)?", t):
            raise Bad(t)
        out.append(float(t))
    return out


def pid_stat(text):
    o, c = text.find("("), text.rfind(")")
    if o < 0 or c < 0 or c < o:
        raise Bad("parens")
    pid = u64(text[:o].strip())
    if pid == 0 or pid > 2**32 - 1:
        raise Bad("pid")
    fields = [str(pid), text[o + 1 : c]] + text[c + 1 :].split()

    def f(n):  # 1-based field number
        if n > len(fields):
            raise Bad("truncated")
        return u64(fields[n - 1])

    return {
        "pid": pid,
        "comm": text[o + 1 : c],
        "utime": f(14),
        "stime": f(15),
        "num_threads": f(20),
        "rss": f(24),
        "delayacct_blkio_ticks": f(42) if len(fields) >= 42 else None,
    }


def pid_status(text):
    rec = {"voluntary_ctxt_switches": None, "nonvoluntary_ctxt_switches": None}
    for line in text.splitlines():
        if ":" not in line:
            continue
        k, v = line.split(":", 1)
        k = k.strip()
        if k in rec:
            toks = v.split()
            if not toks:
                raise Bad("no value")
            rec[k] = u64(toks[0])
    return rec


def cpuacct(text):
    rec = {}
    for line in text.splitlines():
        c = line.split()
        if c and c[0] in ("user", "system"):
            if len(c) < 2:
                raise Bad("no value")
            rec[c[0]] = u64(c[1])
    if set(rec) != {"user", "system"}:
        raise Bad("missing")
    return {"user": rec["user"], "system": rec["system"]}


def is_dev(tok):
    return re.fullmatch(r"[0-9]+:[0-9]+", tok) is not None


def sat_sum(values):
    return min(U64_MAX, sum(values))


def to_int(tok):
    try:
        return u64(tok)
    except Bad:
        return None


def blkio(sectors_text, bytes_text):
    sectors = None
    if sectors_text is not None:
        sectors = 0
        for line in sectors_text.splitlines():
            c = line.split()
            if len(c) == 2 and is_dev(c[0]) and to_int(c[1]) is not None:
                sectors = min(U64_MAX, sectors + int(c[1]))
    rd = wr = 0
    for line in bytes_text.splitlines():
        c = line.split()
        if len(c) != 3 or not is_dev(c[0]) or to_int(c[2]) is None:
            continue
        if c[1] == "Read":
            rd = min(U64_MAX, rd + int(c[2]))
        elif c[1] == "Write":
            wr = min(U64_MAX, wr + int(c[2]))
    return {"sectors_total": sectors, "read_bytes": rd, "write_bytes": wr}


def memory_usage(text):
    toks = text.split()
    if len(toks) != 1:
        raise Bad("count")
    return u64(toks[0])


def procs(text):
    out = []
    for t in text.split():
        v = to_int(t)
        if v is None or v == 0 or v > 2**32 - 1:
            raise Bad(t)
        out.append(v)
    return out


def read(root, rel):
    p = os.path.join(root, rel)
    if not os.path.isfile(p):
        return None
    with open(p, encoding="utf-8", errors="surrogateescape") as fh:
        return fh.read()


def attempt(fn, *args):
    try:
        return True, fn(*args)
    except Bad as e:
        return False, str(e)


def controller(cg, name):
    if not os.path.isdir(cg):
        return None
    if os.path.isdir(os.path.join(cg, name)):
        return os.path.join(cg, name)
    for entry in sorted(os.listdir(cg)):
        if name in entry.split(",") and os.path.isdir(os.path.join(cg, entry)):
            return os.path.join(cg, entry)
    return None


def decode(root):
    proc = os.path.join(root, "proc")
    cg = os.path.join(root, "sys", "fs", "cgroup")
    files = {}
    results = {}

    def record(key, ok, value):
        files[key] = value if ok else {"error": True}
        results[key] = value if ok else None

    single = [
        ("proc/stat", proc_stat),
        ("proc/diskstats", diskstats),
        ("proc/net/dev", net_dev),
        ("proc/meminfo", meminfo),
        ("proc/loadavg", loadavg),
    ]
    for rel, fn in single:
        text = read(root, rel)
        if text is not None:
            record(rel, *attempt(fn, text))

    pids_on_disk = sorted(int(d) for d in os.listdir(proc) if d.isdigit() and int(d) > 0)
    for pid in pids_on_disk:
        for name, fn in (("stat", pid_stat), ("status", pid_status)):
            rel = f"proc/{pid}/{name}"
            text = read(root, rel)
            if text is not None:
                record(rel, *attempt(fn, text))

    cdirs = {c: controller(cg, c) for c in ("cpuacct", "blkio", "memory")}
    v2 = os.path.isfile(os.path.join(cg, "cgroup.controllers")) and not any(cdirs.values())

    def cfile(ctrl, name):
        d = cdirs[ctrl]
        if d is None:
            return None, None
        rel = os.path.relpath(os.path.join(d, name), root)
        return rel, read(root, rel)

    for ctrl, name, fn in (
        ("cpuacct", "cpuacct.stat", cpuacct),
        ("memory", "memory.usage_in_bytes", memory_usage),
        ("cpuacct", "cgroup.procs", procs),
    ):
        rel, text = cfile(ctrl, name)
        if text is not None:
            record(rel, *attempt(fn, text))
    _, sectors_text = cfile("blkio", "blkio.sectors")
    brel, bytes_text = cfile("blkio", "blkio.throttle.io_service_bytes")
    if bytes_text is not None:
        record(os.path.dirname(brel), True, blkio(sectors_text, bytes_text))

    expected = {"files": files}
    if v2:
        expected["config_error"] = "unsupported-cgroup-layout"
        return expected

    # Snapshot as the collector assembles it: every section enabled, pids
    # taken from the cpuacct membership list when that controller exists.
    host = {}
    st = results.get("proc/stat")
    if st:
        host.update(
            vCpuTimeUserMode=st["user"],
            vCpuTimeKernelMode=st["system"],
            vCpuIdleTime=st["idle"],
            vCpuTimeIOWait=st["iowait"],
            vCpuContextSwitches=st["context_switches"],
            vCpuNice=st["nice"],
            vCpuSteal=st["steal"],
        )
    ds = results.get("proc/diskstats")
    if ds is not None:
        host.update(
            vDiskSectorReads=sat_sum(d["sectors_read"] for d in ds),
            vDiskSectorWrites=sat_sum(d["sectors_written"] for d in ds),
            vDiskReadTime=sat_sum(d["read_time_ms"] for d in ds),
            vDiskWriteTime=sat_sum(d["write_time_ms"] for d in ds),
        )
    nd = results.get("proc/net/dev")
    net = None
    if nd is not None:
        net = (sat_sum(n["bytes_recvd"] for n in nd), sat_sum(n["bytes_sent"] for n in nd))
        host.update(vNetworkBytesRecvd=net[0], vNetworkBytesSent=net[1])
    mi = results.get("proc/meminfo")
    if mi:
        host.update(vMemoryTotal=mi["total"], vMemoryFree=mi["free"])
        if mi["buffers"] is not None:
            host["vMemoryBuffers"] = mi["buffers"]
        if mi["cached"] is not None:
            host["vMemoryCached"] = mi["cached"]
    if results.get("proc/loadavg"):
        host["vLoadAvg"] = results["proc/loadavg"]
    boot = read(root, "proc/sys/kernel/random/boot_id")
    if boot is not None:
        host["vId"] = boot.strip()

    container = {}
    rel, _ = cfile("cpuacct", "cpuacct.stat")
    if rel and results.get(rel):
        container.update(cCpuTimeUserMode=results[rel]["user"], cCpuTimeKernelMode=results[rel]["system"])
    if bytes_text is not None:
        b = results[os.path.dirname(brel)]
        if b["sectors_total"] is not None:
            container["cDiskSectorIO"] = b["sectors_total"]
        container.update(cDiskReadBytes=b["read_bytes"], cDiskWriteBytes=b["write_bytes"])
    if net is not None:
        container.update(cNetworkBytesRecvd=net[0], cNetworkBytesSent=net[1])
    rel, _ = cfile("memory", "memory.usage_in_bytes")
    if rel and results.get(rel) is not None:
        container["cMemoryUsed"] = results[rel]
    host_name = read(root, "proc/sys/kernel/hostname")
    if host_name is not None:
        container["cId"] = host_name.strip()
    rel, _ = cfile("cpuacct", "cgroup.procs")
    member = results.get(rel) if rel else None
    if member is not None:
        container["cNumProcesses"] = len(member)

    if cdirs["cpuacct"] is not None:
        pids = sorted(set(member or []))
    else:
        pids = pids_on_disk
    processes = []
    for pid in pids:
        st = results.get(f"proc/{pid}/stat")
        ss = results.get(f"proc/{pid}/status")
        if st is None or ss is None:
            continue
        p = {
            "pId": pid,
            "pName": st["comm"],
            "pCpuTimeUserMode": st["utime"],
            "pCpuTimeKernelMode": st["stime"],
        }
        if ss["voluntary_ctxt_switches"] is not None:
            p["pVoluntaryContextSwitches"] = ss["voluntary_ctxt_switches"]
        if ss["nonvoluntary_ctxt_switches"] is not None:
            p["pNonvoluntaryContextSwitches"] = ss["nonvoluntary_ctxt_switches"]
        if st["delayacct_blkio_ticks"] is not None:
            p["pBlockIODelays"] = st["delayacct_blkio_ticks"]
        p["pResidentSetSize"] = st["rss"]
        p["pNumThreads"] = st["num_threads"]
        processes.append(p)

    expected["snapshot"] = {"host": host, "container": container, "processes": processes}
    return expected


def main():
    base = os.path.join(HERE, "scenarios")
    names = sys.argv[1:] or sorted(os.listdir(base))
    for name in names:
        root = os.path.join(base, name)
        with open(os.path.join(root, "expected.json"), "w") as fh:
            json.dump(decode(root), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {name}/expected.json")


if __name__ == "__main__":
    main()
