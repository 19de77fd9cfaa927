import pytest


@pytest.fixture(autouse=True)
def _docdir(request, tmp_path, monkeypatch):
    """Run the narrative doctests in a temporary directory; they write files."""
    doctest_plugin = request.config.pluginmanager.getplugin("doctestplus")
    if doctest_plugin is not None and isinstance(request.node.parent, doctest_plugin._doctest_textfile_item_cls):
        monkeypatch.chdir(tmp_path)
    yield
