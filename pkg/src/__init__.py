# Rotating Wave Toolkit
# Main package initialization
