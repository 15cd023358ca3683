import pytest


@pytest.fixture
def reporter(request):
    """Terminal writer for summary lines that should bypass output capture."""
    return request.config.pluginmanager.getplugin("terminalreporter")
