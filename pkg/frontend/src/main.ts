import { ApiClient } from "./api";
import { createApp } from "./app";
import { FetchBackdropSource } from "./backdrop";
import "./style.css";

const root = document.getElementById("app");
if (root) {
  createApp(root, {
    api: new ApiClient(""),
    backdrops: new FetchBackdropSource(""),
  });
}
