import numpy as np
import pytest

from harmony.kinematics import RobotModel


@pytest.fixture(scope="session")
def model():
    """Desk-scale robot: disc base, three capsule links."""
    return RobotModel(
        base_radius=0.3,
        arm_mount_offset=(0.0, 0.0),
        link_lengths=(0.5, 0.4, 0.3),
        link_radius=0.05,
        joint_limits=((-2.6, 2.6),) * 3,
        predefined_posture=(0.0, 0.0, 0.0),
        sphere_base=0.3,
        sphere_manip_center=(0.6, 0.0),
        sphere_manip=0.66,
    )


@pytest.fixture(scope="session")
def thin_model():
    """Same chain with zero-thickness links (weight examples use it)."""
    return RobotModel(
        base_radius=0.3,
        arm_mount_offset=(0.0, 0.0),
        link_lengths=(0.5, 0.4, 0.3),
        link_radius=0.0,
        joint_limits=((-2.6, 2.6),) * 3,
        predefined_posture=(0.0, 0.0, 0.0),
        sphere_base=0.3,
        sphere_manip_center=(0.6, 0.0),
        sphere_manip=0.61,
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
