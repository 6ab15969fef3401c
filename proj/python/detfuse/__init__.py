# Copyright 2026 The detfuse Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Detection fusion and COCO-style evaluation for dental panoramic findings."""

from ._detfuse import (
    AnnotatedDataset,
    AnnotatedImage,
    BoundingBox,
    CategoryTriple,
    Detection,
    DetectionSet,
    DetfuseError,
    Disease,
    GroundTruthAnnotation,
    Source,
    StageError,
    builtin_profiles,
    center_distance,
    evaluate,
    generate_scene,
    integrate,
    iou,
    load_detections,
    load_ground_truth,
    oversample_plan,
    run_cli,
    run_pipeline,
    save_detections,
    save_ground_truth,
    simulate_detector,
    split_ids,
    threshold_ensemble,
)

__all__ = [name for name in dir() if not name.startswith("_")]
