"""Synthetic pointing scenes with analytically exact ground truth.

The generator builds a 3D stick figure whose shoulder, head, and fingertip
directions are coplanar with the camera center by construction, so the
pointing circle recovered from the emitted skeleton fixtures equals the plane
of those three directions to machine precision. The target object center is
placed exactly on that circle (or exactly a stated angle off it), and every
detection bounding box is centered on the exact projection of its object
center, so the back-projected candidate center reproduces the object
direction. Ground-truth statements about angular distances therefore hold
analytically, not just approximately.

All randomness comes from one generator seeded per scene, consumed in a fixed
documented order, so a seed fully determines the scene bytes.
"""

from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .config import PipelineConfig
from .errors import BehindView, InvalidParams
from .fixtures import (
    SCHEMA_VERSION,
    GroundTruth,
    detections_to_dict,
    dump_json,
    person_box_to_dict,
    rect_to_dict,
    skeleton_to_dict,
)
from .gesture import PersonBox, Keypoint, Skeleton, person_view_spec, pointing_circle_from_dirs, user_lonlat_from_bbox
from .projection import (
    EquirectGrid,
    LonLatRect,
    ViewSpec,
    gnomonic_forward,
    lonlat_to_equirect_px,
    save_png,
)
from .scan import PERSON_CATEGORY, Detection, scan_views
from .sphere import (
    TWO_PI,
    DirectedPointing,
    LonLat,
    SphereDir,
    dir_to_lonlat,
    lonlat_to_dir,
    point_at_arc,
    wrap_lon,
)

COMMON_CATEGORIES = ("ball", "book", "bottle", "chair", "cup")
RARE_CATEGORIES = (
    "anchor", "banjo", "beacon", "bugle", "casket",
    "chalice", "dagger", "easel", "flask", "gavel",
    "harp", "hourglass", "kettle", "lantern", "lyre",
    "quill", "scepter", "sundial", "trumpet", "urn",
)

# Stick-figure proportions in meters, relative to the torso center, which sits
# PERSON_DIST meters from the camera.
PERSON_DIST = 2.0
NECK_UP = 0.45
HEAD_UP = 0.62
SHOULDER_UP = 0.45
SHOULDER_HALF = 0.20
ARM_LEN = 0.60
PELVIS_DOWN = 0.55
FEET_DOWN = 1.15

MAX_OBJECT_LAT_DEG = 55.0
MAX_OBJECT_LON_DEG = 160.0
MIN_PERSON_GAP_DEG = 28.0

# Bottom-to-top layering for keypoint markers in rendered scenes. Joints the
# pipeline cannot work without (head and arm endpoints) sit above joints a
# detector can reconstruct from their neighbors (elbows, shoulders).
MARKER_Z_ORDER = (
    "l_elbow", "r_elbow",
    "l_shoulder", "r_shoulder",
    "l_wrist", "r_wrist",
    "l_fingertip", "r_fingertip",
    "neck", "head",
)
PLACEMENT_ATTEMPTS = 500


@dataclass(frozen=True)
class SynthParams:
    """Knobs for one synthetic scene; None means sampled from the seed."""

    seed: int = 0
    width: int = 1920
    user_lon_deg: Optional[float] = None
    user_lat_deg: Optional[float] = None
    arm: Optional[str] = None
    target_arc_deg: Optional[float] = None
    target_off_circle_deg: float = 0.0
    num_distractors: int = 0
    distractor_min_off_deg: float = 5.0
    distractor_max_off_deg: float = 25.0
    confuser: bool = False
    noise_px: float = 0.0
    render_image: bool = False

    def __post_init__(self):
        if self.width < 64 or self.width % 2 != 0:
            raise InvalidParams("width must be an even number of pixels, at least 64")
        if self.user_lon_deg is not None and not -150.0 <= self.user_lon_deg <= 150.0:
            raise InvalidParams("user_lon_deg must stay 30 degrees clear of the seam")
        if self.user_lat_deg is not None and not -25.0 <= self.user_lat_deg <= 25.0:
            raise InvalidParams("user_lat_deg must be within [-25, 25]")
        if self.arm is not None and self.arm not in ("left", "right"):
            raise InvalidParams("arm must be 'left' or 'right'")
        if self.target_arc_deg is not None and not 15.0 <= self.target_arc_deg <= 90.0:
            raise InvalidParams("target_arc_deg must be within [15, 90]")
        if not 0.0 <= self.target_off_circle_deg <= 20.0:
            raise InvalidParams("target_off_circle_deg must be within [0, 20]")
        if self.num_distractors < 0:
            raise InvalidParams("num_distractors must be non-negative")
        if not 0.0 < self.distractor_min_off_deg <= self.distractor_max_off_deg:
            raise InvalidParams("distractor offsets must satisfy 0 < min <= max")
        if self.distractor_max_off_deg > 40.0:
            raise InvalidParams("distractor_max_off_deg must be at most 40")
        if self.noise_px < 0.0:
            raise InvalidParams("noise_px must be non-negative")


@dataclass(frozen=True)
class SynthObject:
    category: str
    direction: SphereDir
    ang_radius: float
    kind: str  # target | confuser | distractor
    confidence: float = 0.9


@dataclass
class SynthScene:
    scene_id: str
    params: SynthParams
    grid: EquirectGrid
    user: LonLat
    person_box: PersonBox
    person_view: ViewSpec
    skeleton_view: Skeleton
    skeleton_equirect: Skeleton
    pointing: DirectedPointing
    views: list[ViewSpec]
    objects: list[SynthObject]
    detections_perspective: list[list[Detection]]
    detections_equirect: list[Detection]
    gt: GroundTruth
    image: Optional[np.ndarray] = None


def _unit(v: np.ndarray) -> np.ndarray:
    return v / float(np.linalg.norm(v))


def _sphere(v: np.ndarray) -> SphereDir:
    u = _unit(v)
    return SphereDir(float(u[0]), float(u[1]), float(u[2]))


def _angle_between(a: SphereDir, b: SphereDir) -> float:
    return math.acos(min(1.0, max(-1.0, a.dot(b))))


def _disc_bbox_in_view(vs: ViewSpec, center: SphereDir, rho: float) -> Optional[tuple[float, float, float, float]]:
    """Bounding box of a spherical disc, symmetrized around the projected center.

    Returns None unless the whole box lies inside the view. Centering the box
    on the exact projection makes the back-projected candidate center coincide
    with the object direction.
    """
    try:
        cu, cv = gnomonic_forward(vs, center)
    except BehindView:
        return None
    c = center.as_array()
    b1 = _unit(np.cross(np.array([0.0, 0.0, 1.0]), c))
    b2 = np.cross(c, b1)
    r_u = 0.0
    r_v = 0.0
    for k in range(8):
        psi = TWO_PI * k / 8.0
        d = math.cos(rho) * c + math.sin(rho) * (math.cos(psi) * b1 + math.sin(psi) * b2)
        try:
            u, v = gnomonic_forward(vs, _sphere(d))
        except BehindView:
            return None
        r_u = max(r_u, abs(u - cu))
        r_v = max(r_v, abs(v - cv))
    bbox = (cu - r_u, cv - r_v, cu + r_u, cv + r_v)
    if bbox[0] < 0.0 or bbox[1] < 0.0 or bbox[2] > vs.size or bbox[3] > vs.size:
        return None
    return bbox


def _body_bbox_in_view(vs: ViewSpec, body_dirs: list[SphereDir], pad: float = 6.0) -> Optional[tuple[float, float, float, float]]:
    us, vs_ = [], []
    for d in body_dirs:
        try:
            u, v = gnomonic_forward(vs, d)
        except BehindView:
            return None
        us.append(u)
        vs_.append(v)
    bbox = (min(us) - pad, min(vs_) - pad, max(us) + pad, max(vs_) + pad)
    if bbox[0] < 0.0 or bbox[1] < 0.0 or bbox[2] > vs.size or bbox[3] > vs.size:
        return None
    return bbox


def _gt_rect(direction: SphereDir, rho: float) -> LonLatRect:
    ll = dir_to_lonlat(direction)
    dl = rho / math.cos(ll.lat)
    lon_min = wrap_lon(ll.lon - dl)
    return LonLatRect(lon_min, lon_min + 2.0 * dl, ll.lat - rho, ll.lat + rho)


def _equirect_bbox(grid: EquirectGrid, direction: SphereDir, rho: float) -> tuple[float, float, float, float]:
    ll = dir_to_lonlat(direction)
    cu, cv = lonlat_to_equirect_px(grid, ll)
    r_u = (rho / math.cos(ll.lat)) * grid.width / TWO_PI
    r_v = rho * grid.height / math.pi
    return (cu - r_u, cv - r_v, cu + r_u, cv + r_v)


def _noisy_bbox(bbox, limit_u: float, limit_v: float, rng, noise_px: float):
    if noise_px <= 0.0:
        return bbox
    jitter = rng.normal(0.0, noise_px, 4)
    u0, v0, u1, v1 = (bbox[i] + float(jitter[i]) for i in range(4))
    u0, u1 = sorted((max(0.0, u0), min(limit_u, u1)))
    v0, v1 = sorted((max(0.0, v0), min(limit_v, v1)))
    if u1 - u0 < 2.0 or v1 - v0 < 2.0:
        return None
    return (u0, v0, u1, v1)


def synth_scene(params: SynthParams, cfg: Optional[PipelineConfig] = None) -> SynthScene:
    """Generate one scene; the seed fully determines every byte of its fixtures."""
    cfg = cfg if cfg is not None else PipelineConfig()
    rng = np.random.default_rng(params.seed)
    grid = EquirectGrid(params.width, params.width // 2)

    # 1. user placement and arm choice
    user_lon = math.radians(params.user_lon_deg) if params.user_lon_deg is not None else rng.uniform(
        math.radians(-150.0), math.radians(150.0)
    )
    user_lat = math.radians(params.user_lat_deg) if params.user_lat_deg is not None else rng.uniform(
        math.radians(-25.0), math.radians(25.0)
    )
    arm = params.arm if params.arm is not None else ("left", "right")[int(rng.integers(2))]

    # 2. stick figure in camera coordinates (z up)
    p_dir = lonlat_to_dir(LonLat(user_lon, user_lat)).as_array()
    z_hat = np.array([0.0, 0.0, 1.0])
    side = _unit(np.cross(z_hat, p_dir))
    torso = PERSON_DIST * p_dir
    sign = 1.0 if arm == "left" else -1.0
    neck = torso + NECK_UP * z_hat
    head = torso + HEAD_UP * z_hat
    shoulder_base = torso + SHOULDER_UP * z_hat
    sh_point = shoulder_base + sign * SHOULDER_HALF * side
    sh_other = shoulder_base - sign * SHOULDER_HALF * side

    # 3. pointing arm inside the plane spanned by the shoulder and head directions
    e1 = _unit(sh_point)
    h_dir = _unit(head)
    e2 = _unit(h_dir - float(h_dir @ e1) * e1)
    theta_h = math.atan2(float(h_dir @ e2), float(h_dir @ e1))
    theta_f = theta_h + math.radians(rng.uniform(3.0, 7.0))
    f_dir = math.cos(theta_f) * e1 + math.sin(theta_f) * e2
    b = float(f_dir @ sh_point)
    disc = b * b - float(sh_point @ sh_point) + ARM_LEN * ARM_LEN
    if disc <= 0.0:
        raise InvalidParams("pointing-arm geometry has no solution; widen the figure constants")
    fingertip = (b + math.sqrt(disc)) * f_dir
    elbow = sh_point + 0.5 * (fingertip - sh_point)
    wrist = sh_point + 0.85 * (fingertip - sh_point)
    o_elbow = sh_other - 0.28 * z_hat
    o_wrist = sh_other - 0.52 * z_hat
    o_tip = sh_other - 0.64 * z_hat
    pelvis = torso - PELVIS_DOWN * z_hat
    feet = torso - FEET_DOWN * z_hat

    prefix = "l" if arm == "left" else "r"
    other = "r" if arm == "left" else "l"
    kp_points = {
        "head": head,
        "neck": neck,
        f"{prefix}_shoulder": sh_point,
        f"{prefix}_elbow": elbow,
        f"{prefix}_wrist": wrist,
        f"{prefix}_fingertip": fingertip,
        f"{other}_shoulder": sh_other,
        f"{other}_elbow": o_elbow,
        f"{other}_wrist": o_wrist,
        f"{other}_fingertip": o_tip,
    }
    body_points = [head + 0.10 * z_hat, *kp_points.values(), pelvis, feet]

    # 4. person box in equirect pixels, padded
    pxs = [lonlat_to_equirect_px(grid, dir_to_lonlat(_sphere(p))) for p in body_points]
    pad = 10.0
    box_conf = 0.88 + 0.1 * float(rng.random())
    person_box = PersonBox(
        max(0.0, min(p[0] for p in pxs) - pad),
        max(0.0, min(p[1] for p in pxs) - pad),
        min(float(grid.width), max(p[0] for p in pxs) + pad),
        min(float(grid.height) - 1.0, max(p[1] for p in pxs) + pad),
        confidence=box_conf,
    )
    user = user_lonlat_from_bbox(grid, person_box)
    person_view = person_view_spec(grid, person_box, cfg)

    # 5. true pointing circle from the analytic directions
    dp_true = pointing_circle_from_dirs(_sphere(sh_point), _sphere(head), _sphere(f_dir))

    # 6. skeletons in both frames (confidences first, then per-frame noise)
    kp_conf = {name: 0.82 + 0.16 * float(rng.random()) for name in sorted(kp_points)}
    view_kps = {}
    for name in sorted(kp_points):
        u, v = gnomonic_forward(person_view, _sphere(kp_points[name]))
        if params.noise_px > 0.0:
            u += float(rng.normal(0.0, params.noise_px))
            v += float(rng.normal(0.0, params.noise_px))
        u = min(float(person_view.size), max(0.0, u))
        v = min(float(person_view.size), max(0.0, v))
        view_kps[name] = Keypoint(u, v, kp_conf[name])
    skeleton_view = Skeleton(view_kps, person_view)
    eq_kps = {}
    for name in sorted(kp_points):
        u, v = lonlat_to_equirect_px(grid, dir_to_lonlat(_sphere(kp_points[name])))
        if params.noise_px > 0.0:
            u += float(rng.normal(0.0, params.noise_px))
            v += float(rng.normal(0.0, params.noise_px))
        u = min(float(grid.width), max(0.0, u))
        v = min(float(grid.height), max(0.0, v))
        eq_kps[name] = Keypoint(u, v, kp_conf[name])
    skeleton_equirect = Skeleton(eq_kps, grid)

    # 7. scan views exactly as the pipeline will recompute them
    views = scan_views(dp_true, cfg)

    # 8. object placement with rejection on latitude/longitude/separation bounds
    n_dp = dp_true.circle.normal.as_array()
    target_cat = COMMON_CATEGORIES[int(rng.integers(len(COMMON_CATEGORIES)))]
    target_dist = rng.uniform(2.5, 4.0)
    target_rho = math.asin(0.16 / target_dist)
    person_dir = _sphere(torso)

    def in_bounds(d: SphereDir) -> bool:
        ll = dir_to_lonlat(d)
        return (
            abs(ll.lat) <= math.radians(MAX_OBJECT_LAT_DEG)
            and abs(ll.lon) <= math.radians(MAX_OBJECT_LON_DEG)
        )

    objects: list[SynthObject] = []
    for _attempt in range(PLACEMENT_ATTEMPTS):
        trial: list[SynthObject] = []
        arc_t = (
            math.radians(params.target_arc_deg)
            if params.target_arc_deg is not None
            else rng.uniform(math.radians(25.0), math.radians(60.0))
        )
        t0 = point_at_arc(dp_true, arc_t).as_array()
        delta_t = math.radians(params.target_off_circle_deg)
        t_dir = _sphere(math.cos(delta_t) * t0 + math.sin(delta_t) * n_dp)
        trial.append(SynthObject(target_cat, t_dir, target_rho, "target"))
        if params.confuser:
            arc_c = arc_t + rng.uniform(math.radians(45.0), math.radians(70.0))
            c_dir = point_at_arc(dp_true, arc_c)
            c_rho = math.asin(0.05 / rng.uniform(2.0, 3.0))
            c_cat = RARE_CATEGORIES[int(rng.integers(len(RARE_CATEGORIES)))]
            trial.append(SynthObject(c_cat, c_dir, c_rho, "confuser"))
        for _ in range(params.num_distractors):
            theta_d = rng.uniform(math.radians(15.0), math.radians(120.0))
            delta = rng.uniform(
                math.radians(params.distractor_min_off_deg),
                math.radians(params.distractor_max_off_deg),
            )
            if rng.random() < 0.5:
                delta = -delta
            base = point_at_arc(dp_true, theta_d).as_array()
            d_dir = _sphere(math.cos(delta) * base + math.sin(delta) * n_dp)
            d_rho = math.asin(0.14 / rng.uniform(2.5, 4.5))
            d_cat = COMMON_CATEGORIES[int(rng.integers(len(COMMON_CATEGORIES)))]
            trial.append(SynthObject(d_cat, d_dir, d_rho, "distractor"))
        ok = all(in_bounds(o.direction) for o in trial)
        ok = ok and all(
            _angle_between(o.direction, person_dir) >= math.radians(MIN_PERSON_GAP_DEG) for o in trial
        )
        if ok:
            for i in range(len(trial)):
                for j in range(i + 1, len(trial)):
                    gap = _angle_between(trial[i].direction, trial[j].direction)
                    if gap < trial[i].ang_radius + trial[j].ang_radius + math.radians(3.0):
                        ok = False
        if ok:
            objects = trial
            break
    if not objects:
        raise InvalidParams(
            f"seed {params.seed}: could not place objects inside bounds after {PLACEMENT_ATTEMPTS} attempts"
        )

    # 9. per-object detector confidences, in placement order
    objects = [
        SynthObject(o.category, o.direction, o.ang_radius, o.kind, 0.78 + 0.2 * float(rng.random()))
        for o in objects
    ]

    # 10. perspective detections: box centered on the exact projected center,
    # emitted only when fully inside the view; person boxes ride along so the
    # pipeline's self-exclusion path sees realistic input.
    body_dirs = [_sphere(p) for p in body_points]
    person_conf = 0.8 + 0.15 * float(rng.random())
    detections_perspective: list[list[Detection]] = []
    for i, vs in enumerate(views):
        dets: list[Detection] = []
        for obj in objects:
            bbox = _disc_bbox_in_view(vs, obj.direction, obj.ang_radius)
            if bbox is None:
                continue
            bbox = _noisy_bbox(bbox, float(vs.size), float(vs.size), rng, params.noise_px)
            if bbox is None:
                continue
            dets.append(Detection(obj.category, bbox, obj.confidence, view_index=i))
        pbox = _body_bbox_in_view(vs, body_dirs)
        if pbox is not None:
            pbox = _noisy_bbox(pbox, float(vs.size), float(vs.size), rng, params.noise_px)
            if pbox is not None:
                dets.append(Detection(PERSON_CATEGORY, pbox, person_conf, view_index=i))
        detections_perspective.append(dets)

    # 11. equirect detections for the no-projection stream
    detections_equirect: list[Detection] = []
    for obj in objects:
        bbox = _equirect_bbox(grid, obj.direction, obj.ang_radius)
        bbox = _noisy_bbox(bbox, float(grid.width), float(grid.height), rng, params.noise_px)
        if bbox is not None:
            detections_equirect.append(Detection(obj.category, bbox, obj.confidence, view_index=None))
    pb = person_box
    pbbox = _noisy_bbox(
        (pb.u_min, pb.v_min, pb.u_max, pb.v_max), float(grid.width), float(grid.height), rng, params.noise_px
    )
    if pbbox is not None:
        detections_equirect.append(Detection(PERSON_CATEGORY, pbbox, person_conf, view_index=None))

    gt = GroundTruth(target_cat, _gt_rect(objects[0].direction, objects[0].ang_radius))

    scene = SynthScene(
        scene_id=f"scene-{params.seed:06d}",
        params=params,
        grid=grid,
        user=user,
        person_box=person_box,
        person_view=person_view,
        skeleton_view=skeleton_view,
        skeleton_equirect=skeleton_equirect,
        pointing=dp_true,
        views=views,
        objects=objects,
        detections_perspective=detections_perspective,
        detections_equirect=detections_equirect,
        gt=gt,
    )
    if params.render_image:
        scene.image = render_scene_image(scene)
    return scene


def build_palette() -> dict:
    """Deterministic marker colors for rendered scenes.

    Categories, the person figure, and each keypoint get unique saturated
    colors so a color-matching detector can recover them from rendered views.
    """
    cats = sorted(set(COMMON_CATEGORIES) | set(RARE_CATEGORIES))
    colors = {}
    for i, cat in enumerate(cats):
        r, g, b = colorsys.hsv_to_rgb(i / len(cats), 0.85, 0.95)
        colors[cat] = [int(round(255 * r)), int(round(255 * g)), int(round(255 * b))]
    joint_names = [
        "head", "neck",
        "l_shoulder", "l_elbow", "l_wrist", "l_fingertip",
        "r_shoulder", "r_elbow", "r_wrist", "r_fingertip",
    ]
    joints = {}
    for i, name in enumerate(joint_names):
        r, g, b = colorsys.hsv_to_rgb((i + 0.35) / len(joint_names), 0.45, 1.0)
        joints[name] = [int(round(255 * r)), int(round(255 * g)), int(round(255 * b))]
    return {
        "schema_version": SCHEMA_VERSION,
        "background": [24, 26, 30],
        "grid_line": [40, 44, 50],
        "person": [190, 190, 190],
        "categories": colors,
        "keypoints": joints,
        "marker_half_px": 6,
    }


def render_scene_image(scene: SynthScene) -> np.ndarray:
    """Flat-color rendering of the scene for the marker-based adapters."""
    from PIL import Image, ImageDraw

    palette = build_palette()
    grid = scene.grid
    img = Image.new("RGB", (grid.width, grid.height), tuple(palette["background"]))
    draw = ImageDraw.Draw(img)
    for lon_deg in range(-180, 181, 30):
        u = (lon_deg + 180.0) / 360.0 * grid.width
        draw.line([(u, 0), (u, grid.height)], fill=tuple(palette["grid_line"]), width=1)
    for lat_deg in range(-90, 91, 30):
        v = (90.0 - lat_deg) / 180.0 * grid.height
        draw.line([(0, v), (grid.width, v)], fill=tuple(palette["grid_line"]), width=1)

    # Objects go down first so the person layer — box, limbs, and keypoint
    # markers — stays fully visible for the marker-based detectors.
    for obj in scene.objects:
        bbox = _equirect_bbox(grid, obj.direction, obj.ang_radius)
        color = tuple(palette["categories"][obj.category])
        draw.ellipse([bbox[0], bbox[1], bbox[2], bbox[3]], fill=color)

    person_color = tuple(palette["person"])
    box = scene.person_box
    draw.rectangle([box.u_min, box.v_min, box.u_max, box.v_max], outline=person_color, width=2)
    kps = scene.skeleton_equirect.keypoints

    def kp_px(name: str) -> tuple[float, float]:
        kp = kps[name]
        return kp.u, kp.v

    for a, b in (
        ("head", "neck"),
        ("l_shoulder", "r_shoulder"),
        ("l_shoulder", "l_elbow"), ("l_elbow", "l_wrist"), ("l_wrist", "l_fingertip"),
        ("r_shoulder", "r_elbow"), ("r_elbow", "r_wrist"), ("r_wrist", "r_fingertip"),
    ):
        draw.line([kp_px(a), kp_px(b)], fill=person_color, width=5)
    neck_u, neck_v = kp_px("neck")
    draw.line([(neck_u, neck_v), ((box.u_min + box.u_max) / 2.0, box.v_max - 4)], fill=person_color, width=5)

    # Markers layer bottom-up by how much the pipeline depends on them, so
    # when joints overlap in projection (a pointing arm crossing the face,
    # a foreshortened limb) the critical markers stay visible. Detectors
    # are expected to reconstruct buried joints from skeletal context.
    half = palette["marker_half_px"]
    z_order = {name: z for z, name in enumerate(MARKER_Z_ORDER)}
    for name in sorted(kps, key=lambda n: (z_order.get(n, -1), n)):
        u, v = kp_px(name)
        color = tuple(palette["keypoints"][name])
        draw.rectangle([u - half, v - half, u + half, v + half], fill=color)
    return np.asarray(img, dtype=np.uint8)


def write_scene(scene: SynthScene, out_dir) -> Path:
    """Write one scene's manifest and fixture files; returns the manifest path."""
    out_dir = Path(out_dir)
    scene_dir = out_dir / scene.scene_id
    scene_dir.mkdir(parents=True, exist_ok=True)
    meta = {"generator": "synthetic-oracle", "seed": scene.params.seed, "noise_px": scene.params.noise_px}
    dump_json(scene_dir / "skeleton_view.json", skeleton_to_dict(scene.skeleton_view, metadata=meta))
    dump_json(scene_dir / "skeleton_equirect.json", skeleton_to_dict(scene.skeleton_equirect, metadata=meta))
    det_files = []
    for i, dets in enumerate(scene.detections_perspective):
        name = f"det_view_{i:02d}.json"
        dump_json(scene_dir / name, detections_to_dict(dets, view_index=i, metadata=meta))
        det_files.append(name)
    dump_json(scene_dir / "det_equirect.json", detections_to_dict(scene.detections_equirect, view_index=None, metadata=meta))
    image_rel = None
    if scene.image is not None:
        image_rel = "image.png"
        save_png(scene_dir / image_rel, scene.image)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "id": scene.scene_id,
        "image": {"path": image_rel, "width": scene.grid.width, "height": scene.grid.height},
        "person_box": person_box_to_dict(scene.person_box),
        "skeletons": {"view": "skeleton_view.json", "equirect": "skeleton_equirect.json"},
        "detections": {"perspective": det_files, "equirect": "det_equirect.json"},
        "ground_truth": {"category": scene.gt.category, "lonlat_rect": rect_to_dict(scene.gt.rect)},
        "metadata": {
            "generator": "synthetic-oracle",
            "seed": scene.params.seed,
            "num_distractors": scene.params.num_distractors,
            "confuser": scene.params.confuser,
            "target_off_circle_deg": scene.params.target_off_circle_deg,
            "noise_px": scene.params.noise_px,
        },
    }
    dump_json(scene_dir / "manifest.json", manifest)
    return scene_dir / "manifest.json"


def corpus_params(
    kind: str,
    num_scenes: int,
    base_seed: int = 0,
    noise_px: float = 0.0,
    num_distractors: Optional[int] = None,
    render_images: bool = False,
) -> list[SynthParams]:
    """Parameter lists for the standard corpus variants."""
    if kind == "clean":
        distractors, confuser, off = 0, False, 0.0
    elif kind == "distractors":
        distractors, confuser, off = 5, False, 0.0
    elif kind == "confuser":
        distractors, confuser, off = 2, True, 2.0
    else:
        raise InvalidParams(f"unknown corpus kind {kind!r}")
    if num_distractors is not None:
        distractors = num_distractors
    return [
        SynthParams(
            seed=base_seed + i,
            num_distractors=distractors,
            confuser=confuser,
            target_off_circle_deg=off,
            noise_px=noise_px,
            render_image=render_images,
        )
        for i in range(num_scenes)
    ]


def synth_corpus(
    out_dir,
    params_list: list[SynthParams],
    cfg: Optional[PipelineConfig] = None,
    train_count: Optional[int] = None,
) -> Path:
    """Generate scenes, write a dataset manifest, and return its path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rels = []
    ids = []
    for p in params_list:
        scene = synth_scene(p, cfg)
        manifest_path = write_scene(scene, out_dir)
        rels.append(str(manifest_path.relative_to(out_dir)))
        ids.append(scene.scene_id)
    doc: dict = {"schema_version": SCHEMA_VERSION, "scenes": rels}
    if train_count is not None:
        doc["split"] = {"train": ids[:train_count], "test": ids[train_count:]}
    if any(p.render_image for p in params_list):
        dump_json(out_dir / "palette.json", build_palette())
    dump_json(out_dir / "dataset.json", doc)
    return out_dir / "dataset.json"
