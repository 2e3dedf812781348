import numpy as np


def small_scene(mapsr, seed=0, noise=0.3):
    spec = mapsr.SceneSpec()
    spec.h = 32
    spec.w = 32
    spec.patch = 4
    spec.classes = 3
    spec.feature_dim = 8
    spec.n_regions = 12
    spec.embed_noise = noise
    spec.lr_factor = 4
    spec.seed = seed
    return spec, mapsr.generate_scene(spec)


def test_scene_shapes(mapsr):
    spec, scene = small_scene(mapsr)
    assert scene["image"].shape == (3, 32, 32)
    assert scene["patch_features"].shape == (8, 8, 8)
    assert scene["dense_features"].shape == (8, 32, 32)
    assert scene["truth"].shape == (32, 32)
    assert scene["lr_labels"].shape == (8, 8)
    assert set(np.unique(scene["truth"])) <= set(range(3))


def test_upsample_and_probe_round(mapsr):
    spec, scene = small_scene(mapsr)
    feats = mapsr.upsample_features(scene["patch_features"], scene["image"])
    assert feats.shape == (8, 32, 32)
    lr_up = mapsr.upsample_labels_nn(scene["lr_labels"], 3, 32, 32)
    weights = mapsr.train_probe(feats, lr_up, 3, epochs=6, batch_pixels=0)
    assert weights.shape == (3, 8)
    pred = mapsr.probe_predict(weights, feats)
    assert pred.shape == (32, 32)

    prompts = mapsr.build_agreement_prompts(feats, pred, lr_up, 3)
    assert prompts["prompts"].shape == (3, 8)
    scores = mapsr.cosine_scores(feats, prompts["prompts"])
    labels = mapsr.argmax_labels(scores)
    assert labels.shape == (32, 32)


def test_miou_identity(mapsr):
    _, scene = small_scene(mapsr)
    res = mapsr.miou(scene["truth"], scene["truth"], 3)
    assert res["miou"] == 1.0


def test_slic_partition(mapsr):
    _, scene = small_scene(mapsr)
    seg = mapsr.slic_segment(scene["image"], n_segments=16)
    assert seg.shape == (32, 32)
    ids = np.unique(seg)
    assert ids.min() == 0
    assert len(ids) == ids.max() + 1  # contiguous ids


def test_pipeline_end_to_end(mapsr):
    _, scene = small_scene(mapsr)
    config = {
        "chip_size": "16",
        "slic.n_segments": "24",
        "graph.k": "8",
        "probe.epochs": "6",
    }
    out = mapsr.run_pipeline(
        scene["image"],
        scene["patch_features"],
        scene["lr_labels"],
        3,
        truth=scene["truth"],
        config=config,
    )
    assert out["labels"].shape == (32, 32)
    assert 0.0 <= out["miou"] <= 1.0
    # deterministic
    out2 = mapsr.run_pipeline(
        scene["image"],
        scene["patch_features"],
        scene["lr_labels"],
        3,
        truth=scene["truth"],
        config=config,
    )
    assert np.array_equal(out["labels"], out2["labels"])


def test_noiseless_oracle_exact(mapsr):
    spec = mapsr.SceneSpec()
    spec.h = 32
    spec.w = 32
    spec.patch = 1
    spec.classes = 3
    spec.feature_dim = 8
    spec.embed_noise = 0.0
    spec.lr_factor = 4
    spec.seed = 5
    scene = mapsr.generate_scene(spec)
    out = mapsr.run_pipeline(
        scene["image"],
        scene["patch_features"],
        scene["lr_labels"],
        3,
        truth=scene["truth"],
        config={
            "prompt_mode": "oracle_hr",
            "stages.graph_refine": "false",
            "stages.superpixel": "false",
            "stages.upsample_mode": "nearest",
            "chip_size": "32",
        },
    )
    assert out["miou"] == 1.0
