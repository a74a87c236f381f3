"""Self-similarity machinery for non-rigid object detection."""

__version__ = "0.1.0"

from .geometry import (BBox, Contour, HDResult, Point, Space, directed_hausdorff,
                       hausdorff, hausdorff_points, iou, normalize_contour)
from .mask import (BinaryMask, ContourExtraction, GrayImage, binarize, crop,
                   extract_contour, extract_normalized_contour, max_component,
                   otsu_threshold, pair_hd, trace_outer_contour)
from .losses import (CIoUTerms, RegressionTarget, ciou_loss, ciou_terms,
                     encode_regression, smooth_l1, smooth_l1_box_loss)
from .gate import (GateConfig, GateDecision, PairRecord, gate_decision, gate_pair,
                   gated_ciou_loss, gated_smooth_l1_loss)
from .evaluation import (Category, ClassReport, ContourCache, Dataset, Detection,
                         EvalConfig, EvalReport, GroundTruth, ImageInfo,
                         average_precision, evaluate, match_detections, pr_curve)
from .synth import (SceneObject, SceneSpec, SyntheticScene, compose_scene,
                    gen_plume, gen_sierpinski, sierpinski_regions)
