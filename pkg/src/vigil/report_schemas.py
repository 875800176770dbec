"""JSON Schemas for the report documents the CLI writes (--report).

These are the documented contract for downstream consumers; the test suite
validates every emitted report against them.
"""

from __future__ import annotations

LABEL_NAMES = ["normal", "smoking", "calling", "smoking_calling"]

_RESULT = {
    "type": "object",
    "required": ["label", "confidence", "probs"],
    "properties": {
        "label": {"enum": LABEL_NAMES},
        "confidence": {"type": "number", "minimum": 0, "maximum": 1},
        "probs": {
            "type": "array",
            "items": {"type": "number", "minimum": 0, "maximum": 1},
            "minItems": 4,
            "maxItems": 4,
        },
    },
}

_DARK = {
    "type": "object",
    "required": ["dark_pixel_count", "total_pixels", "ratio", "is_dark"],
    "properties": {
        "dark_pixel_count": {"type": "integer", "minimum": 0},
        "total_pixels": {"type": "integer", "minimum": 1},
        "ratio": {"type": "number", "minimum": 0, "maximum": 1},
        "is_dark": {"type": "boolean"},
    },
}

_IMAGE = {
    "type": "object",
    "required": ["width", "height"],
    "properties": {
        "width": {"type": "integer", "minimum": 1},
        "height": {"type": "integer", "minimum": 1},
    },
}

_PERCENTAGES = {
    "type": ["object", "null"],
    "required": LABEL_NAMES,
    "properties": {name: {"type": "number", "minimum": 0, "maximum": 100} for name in LABEL_NAMES},
    "additionalProperties": False,
}

CLASSIFY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kind", "image", "backend", "result", "dark", "enhancement_applied", "elapsed_s"],
    "properties": {
        "kind": {"const": "classify"},
        "image": _IMAGE,
        "backend": {"type": "string"},
        "result": _RESULT,
        "dark": _DARK,
        "enhancement_applied": {"type": "boolean"},
        "enhance_mode": {"enum": ["auto", "always", "never"]},
        "gamma": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "elapsed_s": {"type": "number", "minimum": 0},
        "warnings": {"type": "array", "items": {"type": "string"}},
    },
}

LOCALIZE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "kind", "image", "backend", "rows", "cols", "whole", "tiles",
        "match_mask", "invocations", "elapsed_s",
    ],
    "properties": {
        "kind": {"const": "localize"},
        "image": _IMAGE,
        "backend": {"type": "string"},
        "rows": {"type": "integer", "minimum": 1},
        "cols": {"type": "integer", "minimum": 1},
        "whole": _RESULT,
        "tiles": {"type": "array", "items": _RESULT},
        "match_mask": {"type": "array", "items": {"type": "boolean"}},
        "invocations": {"type": "integer", "minimum": 1},
        "dark": _DARK,
        "enhancement_applied": {"type": "boolean"},
        "elapsed_s": {"type": "number", "minimum": 0},
        "warnings": {"type": "array", "items": {"type": "string"}},
    },
}

VIDEO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kind", "backend", "window", "frames", "run"],
    "properties": {
        "kind": {"const": "video"},
        "backend": {"type": "string"},
        "window": {"type": "integer", "minimum": 1},
        "source": {"enum": ["frames-dir", "raw-stdin"]},
        "frames": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["frame_index", "raw", "mode_label", "mode_mean"],
                "properties": {
                    "frame_index": {"type": "integer", "minimum": 0},
                    "raw": _RESULT,
                    "mode_label": {"enum": LABEL_NAMES},
                    "mode_mean": {"type": "number", "minimum": 0, "maximum": 1},
                    "enhancement_applied": {"type": "boolean"},
                },
            },
        },
        "run": {
            "type": "object",
            "required": ["frames_processed", "elapsed_s", "fps", "label_percentages"],
            "properties": {
                "frames_processed": {"type": "integer", "minimum": 0},
                "elapsed_s": {"type": "number", "exclusiveMinimum": 0},
                "fps": {"type": "number", "minimum": 0},
                "label_percentages": _PERCENTAGES,
            },
        },
        "partial_trailing_frame": {"type": "boolean"},
    },
}

STATS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kind", "root", "pixel_threshold", "ratio_threshold", "classes", "skipped"],
    "properties": {
        "kind": {"const": "stats"},
        "root": {"type": "string"},
        "pixel_threshold": {"type": "integer", "minimum": 0, "maximum": 255},
        "ratio_threshold": {"type": "number", "minimum": 0, "maximum": 1},
        "classes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["class_name", "image_count", "dark_count", "dark_percentage"],
                "properties": {
                    "class_name": {"type": "string"},
                    "image_count": {"type": "integer", "minimum": 0},
                    "dark_count": {"type": "integer", "minimum": 0},
                    "dark_percentage": {"type": ["number", "null"], "minimum": 0, "maximum": 100},
                },
            },
        },
        "skipped": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["path", "reason"],
                "properties": {"path": {"type": "string"}, "reason": {"type": "string"}},
            },
        },
    },
}

SCHEMAS = {
    "classify": CLASSIFY_SCHEMA,
    "localize": LOCALIZE_SCHEMA,
    "video": VIDEO_SCHEMA,
    "stats": STATS_SCHEMA,
}
