import { ConsoleApp } from './app.js';

// same-origin by default (the gateway serves the console); override with
// ?gateway=http://host:3030 during development
const params = new URLSearchParams(window.location.search);
const gateway = params.get('gateway') ?? window.location.origin;

const app = new ConsoleApp(gateway);
void app.start();
