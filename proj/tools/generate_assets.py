#!/usr/bin/env python3
"""Writes the bundled skeleton models, synthetic pose-estimator captures and
the toy reference clip into data/.

The captures imitate the estimator's export layout (axis-angle vectors in the
estimator frame: x left, y up, z forward) but are synthesized from smooth
joint-space trajectories. Re-running the script reproduces the files exactly.

Usage: generate_assets.py [--root DIR]
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np

# Model frame: x forward, y up, z right. Estimator frame: x left, y up, z forward.
SOURCE_TO_MODEL = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])

BODY_SOURCES = [
    "pelvis", "L_hip", "R_hip", "spine1", "L_knee", "R_knee", "spine2", "L_ankle", "R_ankle", "spine3",
    "L_foot", "R_foot", "neck", "L_collar", "R_collar", "head", "L_shoulder", "R_shoulder", "L_elbow",
    "R_elbow", "L_wrist", "R_wrist", "L_hand", "R_hand",
]
HAND_SOURCES = [
    "index1", "index2", "index3", "middle1", "middle2", "middle3", "pinky1", "pinky2", "pinky3",
    "ring1", "ring2", "ring3", "thumb1", "thumb2", "thumb3",
]
FINGERS = ["index", "middle", "ring", "pinky"]
PHALANGES = ["mcp", "pip", "dip"]

THUMB_AXIS = (0.8, 0.0, -0.6)
THUMB_DIR = (0.6, 0.0, 0.8)


# --- rotations (quaternions as w, x, y, z) ---------------------------------

def quat_from_rotvec(r):
    r = np.asarray(r, dtype=float)
    angle = float(np.linalg.norm(r))
    if angle < 1e-12:
        return np.array([1.0, 0.0, 0.0, 0.0])
    axis = r / angle
    return np.concatenate([[math.cos(angle / 2)], math.sin(angle / 2) * axis])


def rotvec_from_quat(q):
    q = np.asarray(q, dtype=float)
    if q[0] < 0:
        q = -q
    s = float(np.linalg.norm(q[1:]))
    if s < 1e-12:
        return 2.0 * q[1:]
    return 2.0 * math.atan2(s, q[0]) * q[1:] / s


def quat_mul(a, b):
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_conj(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def axis_angle(axis, angle):
    return quat_from_rotvec(np.asarray(axis, dtype=float) * angle)


def mirror_vec(v):
    """Sagittal mirror (z -> -z) of a point."""
    return [v[0], v[1], -v[2]]


def mirror_axis(a):
    """Mirror of a rotation axis (pseudovector)."""
    return [-a[0], -a[1], a[2]]


def mirror_quat(q):
    return np.array([q[0], -q[1], -q[2], q[3]])


def to_source(rotvec_model):
    """Model-frame rotation vector -> estimator-frame rotation vector."""
    return SOURCE_TO_MODEL.T @ np.asarray(rotvec_model, dtype=float)


# --- skeleton ---------------------------------------------------------------

def capsule(radius, length, axis, center):
    return {"type": "capsule", "dims": [radius, length], "axis": axis, "center": center}


def box(dims, center):
    return {"type": "box", "dims": dims, "center": center}


def sphere(radius, center):
    return {"type": "sphere", "dims": [radius], "center": center}


def r(values, digits=6):
    return [round(float(v), digits) for v in values]


def hand_links(side, parent):
    """Palm plus finger segments for one hand. Right-hand geometry, mirrored for the left."""
    m = (lambda v: v) if side == "right" else mirror_vec
    ma = (lambda v: v) if side == "right" else mirror_axis
    links, joints = [], []
    palm = f"{side}_hand"
    links.append({"name": palm, "parent": parent, "offset": r(m([0, 0, 0.26])), "mass": 0.3,
                  "shape": box([0.08, 0.025, 0.09], r(m([0, 0, 0.045])))})
    joints.append({"name": f"{side}_wrist", "type": "revolute", "child": palm, "axis": r(ma([1, 0, 0])),
                   "limits": [[-1.2, 1.2]], "kp": 30.0, "kd": 0.3})
    seg_mass = 0.2 / 15.0
    lengths = [0.045, 0.028, 0.022]
    spread = {"index": 0.03, "middle": 0.01, "ring": -0.01, "pinky": -0.03}
    for finger in FINGERS:
        parent_link = palm
        offset = [spread[finger], 0.0, 0.09]
        for k, ph in enumerate(PHALANGES):
            name = f"{side}_{finger}{k + 1}"
            links.append({"name": name, "parent": parent_link, "offset": r(m(offset)), "mass": round(seg_mass, 6),
                          "shape": capsule(0.008, lengths[k], "z", r(m([0, 0, lengths[k] / 2])))})
            joints.append({"name": f"{side}_{finger}_{ph}", "type": "revolute", "child": name,
                           "axis": r(ma([1, 0, 0])), "limits": [[0.0, math.pi / 2]], "kp": 5.0, "kd": 0.1})
            parent_link = name
            offset = [0.0, 0.0, lengths[k]]
    # Thumb: fixed carpometacarpal segment, then two hinges.
    thumb_len = [0.04, 0.035, 0.03]
    links.append({"name": f"{side}_thumb0", "parent": palm, "offset": r(m([0.035, 0.0, 0.02])),
                  "mass": round(seg_mass, 6),
                  "shape": capsule(0.01, thumb_len[0], "z", r(m([0, 0, thumb_len[0] / 2])))})
    joints.append({"name": f"{side}_thumb_cmc", "type": "fixed", "child": f"{side}_thumb0"})
    parent_link = f"{side}_thumb0"
    for k, (ph, lo, hi) in enumerate([("mcp", -0.3, 1.2), ("ip", -0.2, 1.5)]):
        name = f"{side}_thumb{k + 1}"
        off = np.array(THUMB_DIR) * thumb_len[k]
        links.append({"name": name, "parent": parent_link, "offset": r(m(off)), "mass": round(seg_mass, 6),
                      "shape": sphere(0.009, r(m(np.array(THUMB_DIR) * thumb_len[k + 1] / 2)))})
        joints.append({"name": f"{side}_thumb_{ph}", "type": "revolute", "child": name,
                       "axis": r(ma(THUMB_AXIS)), "limits": [[lo, hi]], "kp": 5.0, "kd": 0.1})
        parent_link = name
    return links, joints


def signer_model():
    links = [
        {"name": "pelvis", "parent": None, "offset": [0, 0, 0], "mass": 6.0, "shape": box([0.2, 0.15, 0.3], [0, 0.05, 0])},
        {"name": "chest", "parent": "pelvis", "offset": [0, 0.236, 0], "mass": 14.0,
         "shape": box([0.2, 0.3, 0.32], [0, 0.12, 0])},
        {"name": "head", "parent": "chest", "offset": [0, 0.224, 0], "mass": 2.0, "shape": sphere(0.1, [0, 0.15, 0])},
    ]
    joints = [
        {"name": "root", "type": "spherical", "child": "pelvis"},
        {"name": "chest", "type": "spherical", "child": "chest", "limits": [[-1.0, 1.0]] * 3, "kp": 1000.0, "kd": 100.0},
        {"name": "neck", "type": "spherical", "child": "head", "limits": [[-1.0, 1.0]] * 3, "kp": 100.0, "kd": 10.0},
    ]
    for side in ("right", "left"):
        m = (lambda v: v) if side == "right" else mirror_vec
        links += [
            {"name": f"{side}_upper_arm", "parent": "chest", "offset": r(m([-0.024, 0.221, 0.18])), "mass": 1.5,
             "shape": capsule(0.045, 0.18, "z", r(m([0, 0, 0.135])))},
            {"name": f"{side}_forearm", "parent": f"{side}_upper_arm", "offset": r(m([0, 0, 0.27])), "mass": 1.0,
             "shape": capsule(0.04, 0.135, "z", r(m([0, 0, 0.13])))},
        ]
        elbow_axis = [0, 1, 0] if side == "right" else [0, -1, 0]
        joints += [
            {"name": f"{side}_shoulder", "type": "spherical", "child": f"{side}_upper_arm", "kp": 400.0, "kd": 8.0},
            {"name": f"{side}_elbow", "type": "revolute", "child": f"{side}_forearm", "axis": elbow_axis,
             "limits": [[0.0, 2.6]], "kp": 300.0, "kd": 6.0},
        ]
        hl, hj = hand_links(side, f"{side}_forearm")
        links += hl
        joints += hj
        links += [
            {"name": f"{side}_thigh", "parent": "pelvis", "offset": r(m([0, -0.08, 0.085])), "mass": 4.5,
             "shape": capsule(0.055, 0.3, "y", [0, -0.21, 0])},
            {"name": f"{side}_shin", "parent": f"{side}_thigh", "offset": [0, -0.421, 0], "mass": 3.0,
             "shape": capsule(0.05, 0.31, "y", [0, -0.2, 0])},
            {"name": f"{side}_foot", "parent": f"{side}_shin", "offset": [0, -0.409, 0], "mass": 1.0,
             "shape": box([0.18, 0.055, 0.09], [0.045, -0.0225, 0])},
        ]
        joints += [
            {"name": f"{side}_hip", "type": "spherical", "child": f"{side}_thigh", "kp": 500.0, "kd": 50.0},
            {"name": f"{side}_knee", "type": "revolute", "child": f"{side}_shin", "axis": [0, 0, 1], "kp": 500.0,
             "kd": 50.0},
            {"name": f"{side}_ankle", "type": "spherical", "child": f"{side}_foot", "kp": 300.0, "kd": 30.0},
        ]

    fixed = ["root"] + [f"{s}_{j}" for s in ("right", "left") for j in ("hip", "knee", "ankle")]
    retarget = {
        "pelvis": "root", "spine1": "chest", "spine2": "chest", "spine3": "chest", "neck": "neck", "head": "neck",
    }
    for side, src in (("right", "R"), ("left", "L")):
        retarget.update({
            f"{src}_collar": f"{side}_shoulder", f"{src}_shoulder": f"{side}_shoulder",
            f"{src}_elbow": f"{side}_elbow", f"{src}_wrist": f"{side}_wrist",
            f"{src}_hip": f"{side}_hip", f"{src}_knee": f"{side}_knee", f"{src}_ankle": f"{side}_ankle",
        })
        prefix = "rhand." if side == "right" else "lhand."
        for finger in FINGERS:
            for k, ph in enumerate(PHALANGES):
                retarget[f"{prefix}{finger}{k + 1}"] = f"{side}_{finger}_{ph}"
        retarget[f"{prefix}thumb2"] = f"{side}_thumb_mcp"
        retarget[f"{prefix}thumb3"] = f"{side}_thumb_ip"

    body = ["chest", "neck"] + [f"{s}_{j}" for s in ("right", "left") for j in ("shoulder", "elbow", "wrist")]
    hand = [f"{s}_{f}_{p}" for s in ("right", "left") for f in FINGERS for p in PHALANGES]
    hand += [f"{s}_thumb_{p}" for s in ("right", "left") for p in ("mcp", "ip")]
    return {
        "schema_version": 1,
        "name": "signer",
        "links": links,
        "joints": joints,
        "fixed": fixed,
        "retarget_map": retarget,
        "groups": {"body": body, "hand": hand, "end_effectors": ["left_wrist", "right_wrist"]},
    }


def toy_arm_model():
    return {
        "schema_version": 1,
        "name": "toy_arm",
        "links": [
            {"name": "base", "parent": None, "offset": [0, 0, 0], "mass": 2.0, "shape": box([0.1, 0.1, 0.1], [0, 0, 0])},
            {"name": "upper", "parent": "base", "offset": [0, 0, 0.05], "mass": 1.0,
             "shape": capsule(0.03, 0.24, "z", [0, 0, 0.15])},
            {"name": "fore", "parent": "upper", "offset": [0, 0, 0.3], "mass": 0.6,
             "shape": capsule(0.025, 0.2, "z", [0, 0, 0.125])},
            {"name": "tip", "parent": "fore", "offset": [0, 0, 0.25], "mass": 0.1, "shape": sphere(0.02, [0, 0, 0])},
        ],
        "joints": [
            {"name": "mount", "type": "spherical", "child": "base"},
            {"name": "shoulder", "type": "revolute", "child": "upper", "axis": [1, 0, 0], "limits": [[-2.0, 2.0]],
             "kp": 60.0, "kd": 3.0},
            {"name": "elbow", "type": "revolute", "child": "fore", "axis": [1, 0, 0], "limits": [[-2.5, 2.5]],
             "kp": 40.0, "kd": 2.0},
            {"name": "tip", "type": "fixed", "child": "tip"},
        ],
        "fixed": ["mount"],
        "groups": {"body": ["shoulder", "elbow"], "hand": [], "end_effectors": ["tip"]},
    }


def toy_clip(rate=30.0, frames=60):
    out = []
    for i in range(frames):
        t = i / rate
        w = 2 * math.pi * t / (frames / rate)
        out.append({"root_position": [0, 0, 0], "root_rotation": [1, 0, 0, 0],
                    "joints": {"shoulder": round(0.6 * math.sin(w), 9), "elbow": round(0.8 + 0.5 * math.sin(w + 1.0), 9)}})
    return {"format": "signmimic-clip", "schema_version": 1, "label": "toy_sine", "rate": rate, "frames": out}


# --- synthetic signing ---------------------------------------------------------

NEUTRAL = {"gamma": 0.15, "phi": 1.35, "elbow": 0.35, "wrist": 0.0, "fingers": 0.25, "thumb": 0.2,
           "yaw": 0.0, "chest": (0.0, 0.0, 0.0), "neck": (0.0, 0.0, 0.0)}


def arm_rotation(gamma, phi, yaw):
    """Shoulder rotation of the right arm: drop by phi about x, swing forward by
    gamma about z, then turn by yaw about the vertical."""
    q = quat_mul(axis_angle([0, 0, 1], gamma), axis_angle([1, 0, 0], phi))
    return quat_mul(axis_angle([0, 1, 0], yaw), q)


def envelope(u):
    return 0.5 * (1.0 - math.cos(2 * math.pi * u))


def blend(neutral, target, e):
    return neutral + e * (target - neutral)


class Sign:
    def __init__(self, label, seconds, fps, right, left=None, extra=None, mirror_left=False, right_only=False):
        self.label = label
        self.seconds = seconds
        self.fps = fps
        self.right = right          # targets for the right arm/hand
        self.left = left or {}      # targets for the left arm/hand (right-arm parametrization, mirrored)
        self.extra = extra or (lambda u, e, side, p: p)
        self.right_only = right_only

    def params(self, u, side):
        e = envelope(u)
        target = self.right if side == "right" else self.left
        p = {}
        for key in ("gamma", "phi", "elbow", "wrist", "fingers", "thumb", "yaw"):
            p[key] = blend(NEUTRAL[key], target.get(key, NEUTRAL[key]), e)
        for key in ("index", "middle", "ring", "pinky"):
            p[key] = p["fingers"] + e * (target.get(key, target.get("fingers", NEUTRAL["fingers"])) -
                                        target.get("fingers", NEUTRAL["fingers"]))
        return self.extra(u, e, side, p)


def frame_from_params(sign, u, rng=None, jitter=(0.0, 0.0)):
    body = [np.zeros(3) for _ in BODY_SOURCES]
    hands = {}
    e = envelope(u)
    chest = np.array([0.04 * math.sin(2 * math.pi * u), 0.05 * e, 0.0])
    neck = np.array([0.0, 0.08 * math.sin(2 * math.pi * u), -0.06 * e])
    # chest = spine1 * spine2 * spine3: split evenly (commuting, same axis).
    for name in ("spine1", "spine2", "spine3"):
        body[BODY_SOURCES.index(name)] = to_source(chest / 3.0)
    body[BODY_SOURCES.index("neck")] = to_source(neck * 0.5)
    body[BODY_SOURCES.index("head")] = to_source(neck * 0.5)
    collar = axis_angle([1, 0, 0], 0.05)
    for side, src in (("right", "R"), ("left", "L")):
        p = sign.params(u, side)
        q = arm_rotation(p["gamma"], p["phi"], p["yaw"])
        elbow_axis = np.array([0.0, 1.0, 0.0])
        wrist_axis = np.array([1.0, 0.0, 0.0])
        c = collar
        if side == "left":
            q = mirror_quat(q)
            c = mirror_quat(collar)
            elbow_axis = np.array([0.0, -1.0, 0.0])
            wrist_axis = np.array([-1.0, 0.0, 0.0])
        shoulder_part = quat_mul(quat_conj(c), q)
        body[BODY_SOURCES.index(f"{src}_collar")] = to_source(rotvec_from_quat(c))
        body[BODY_SOURCES.index(f"{src}_shoulder")] = to_source(rotvec_from_quat(shoulder_part))
        body[BODY_SOURCES.index(f"{src}_elbow")] = to_source(elbow_axis * p["elbow"])
        body[BODY_SOURCES.index(f"{src}_wrist")] = to_source(wrist_axis * p["wrist"])
        finger_axis = np.array([1.0, 0.0, 0.0]) if side == "right" else np.array([-1.0, 0.0, 0.0])
        thumb_axis = np.array(THUMB_AXIS) if side == "right" else np.array(mirror_axis(THUMB_AXIS))
        hand = []
        for name in HAND_SOURCES:
            finger, k = name[:-1], int(name[-1])
            if finger == "thumb":
                angle = 0.0 if k == 1 else p["thumb"] * (1.0 if k == 2 else 1.2)
                hand.append(to_source(thumb_axis * angle))
            else:
                scale = (1.0, 1.1, 0.8)[k - 1]
                hand.append(to_source(finger_axis * p[finger] * scale))
        hands[side] = hand
    if rng is not None:
        body_sigma, hand_sigma = jitter
        for name in ("spine1", "spine2", "spine3", "neck", "head", "L_collar", "R_collar", "L_shoulder", "R_shoulder",
                     "L_elbow", "R_elbow", "L_wrist", "R_wrist"):
            body[BODY_SOURCES.index(name)] = body[BODY_SOURCES.index(name)] + rng.normal(0.0, body_sigma, 3)
        for side in hands:
            hands[side] = [h + rng.normal(0.0, hand_sigma, 3) for h in hands[side]]
    frame = {"pred_body_pose": [round(float(x), 9) for v in body for x in v],
             "pred_rhand_pose": [round(float(x), 9) for v in hands["right"] for x in v],
             "root_translation": [0.0, 0.0, 0.0]}
    if not sign.right_only:
        frame["pred_lhand_pose"] = [round(float(x), 9) for v in hands["left"] for x in v]
    return frame


def capture_frames(sign, rng=None, jitter=(0.0, 0.0)):
    n = int(round(sign.seconds * sign.fps))
    # Periodic: the last frame repeats the first (both neutral).
    return [frame_from_params(sign, i / (n - 1), rng, jitter) for i in range(n)]


def tap(count, amplitude, key):
    def extra(u, e, side, p):
        if side == "right":
            p[key] += amplitude * e * math.sin(2 * math.pi * count * u)
        return p
    return extra


def wiggle(u, e, side, p):
    phase = {"index": 0.0, "middle": 0.8, "ring": 1.6, "pinky": 2.4}
    for finger, ph in phase.items():
        p[finger] += 0.35 * e * math.sin(2 * math.pi * 3 * u + ph + (0.5 if side == "left" else 0.0))
    return p


def symmetric_tap(u, e, side, p):
    p["yaw"] += 0.12 * e * math.sin(2 * math.pi * 2 * u)
    return p


SIGNS = [
    # Right hand to the chin, hand closing and opening twice.
    Sign("00433", 2.4, 30.0,
         right={"gamma": 0.55, "phi": 1.45, "elbow": 2.05, "wrist": 0.2, "fingers": 0.9, "thumb": 0.6, "yaw": 0.35},
         extra=tap(2, 0.45, "fingers")),
    # Both hands in front of the chest, fingers wiggling.
    Sign("52861", 2.8, 25.0,
         right={"gamma": 0.7, "phi": 1.3, "elbow": 1.5, "wrist": -0.2, "fingers": 0.6, "thumb": 0.3, "yaw": 0.3},
         left={"gamma": 0.7, "phi": 1.3, "elbow": 1.5, "wrist": -0.2, "fingers": 0.6, "thumb": 0.3, "yaw": 0.3},
         extra=wiggle),
    # Right index pointing, arm sweeping sideways; only the right hand detected.
    Sign("69318", 2.5, 30.0,
         right={"gamma": 0.8, "phi": 1.1, "elbow": 0.9, "wrist": 0.0, "fingers": 1.35, "index": 0.05, "thumb": 0.9,
                "yaw": -0.3},
         extra=tap(1, 0.35, "yaw"), right_only=True),
    # Both fists tapping together twice.
    Sign("69402", 2.4, 25.0,
         right={"gamma": 0.6, "phi": 1.25, "elbow": 1.4, "fingers": 1.4, "thumb": 0.8, "yaw": 0.45},
         left={"gamma": 0.6, "phi": 1.25, "elbow": 1.4, "fingers": 1.4, "thumb": 0.8, "yaw": 0.45},
         extra=symmetric_tap),
    # Open hand, thumb tapping the forehead twice.
    Sign("69546", 2.6, 30.0,
         right={"gamma": 0.95, "phi": 1.5, "elbow": 2.3, "wrist": 0.3, "fingers": 0.0, "thumb": 0.1, "yaw": 0.45},
         extra=tap(2, 0.2, "elbow")),
]

TUNING = Sign("tuning", 2.0, 30.0,
              right={"gamma": 0.6, "phi": 1.4, "elbow": 1.8, "wrist": 0.1, "fingers": 0.8, "thumb": 0.5, "yaw": 0.3},
              left={"gamma": 0.4, "phi": 1.3, "elbow": 1.2, "fingers": 0.5, "thumb": 0.3, "yaw": 0.2},
              extra=tap(2, 0.3, "fingers"))
# Per-axis estimator noise (rad) of the tuning capture, body and hands.
TUNING_JITTER = (0.0065, 0.42)


def write_json(path, doc, indent=None):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(doc, f, indent=indent)
        f.write("\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--root", default=Path(__file__).resolve().parent.parent / "data", type=Path)
    args = parser.parse_args()
    root = args.root

    write_json(root / "signer.model", signer_model(), indent=1)
    write_json(root / "toy_arm.model", toy_arm_model(), indent=1)
    write_json(root / "clips" / "toy_sine.clip", toy_clip(), indent=1)

    for sign in SIGNS:
        frames = capture_frames(sign)
        if sign.label == "00433":
            # Per-frame export directory, as written by the estimator's demo tools.
            d = root / "captures" / sign.label
            for i, f in enumerate(frames):
                write_json(d / f"frame_{i:05d}.json", f)
            write_json(d / "meta.json", {"fps": sign.fps})
        else:
            write_json(root / "captures" / f"{sign.label}.json", {"fps": sign.fps, "frames": frames})

    rng = np.random.default_rng(20240607)
    write_json(root / "captures" / "tuning.json",
               {"fps": TUNING.fps, "frames": capture_frames(TUNING, rng, TUNING_JITTER)})


if __name__ == "__main__":
    main()
